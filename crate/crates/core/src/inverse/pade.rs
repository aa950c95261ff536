//! Pole extraction from power series of the form
//!
//! ```text
//! sₙ = K δₙ₀ + Σᵢ [αᵢ tᵢⁿ⁺¹ + βᵢ (n+1) tᵢⁿ]
//! ```
//!
//! i.e. `s(x) = K + Σᵢ [αᵢ tᵢ/(1 − tᵢx) + βᵢ/(1 − tᵢx)²]`, a rational function
//! with at most double poles at `x = 1/tᵢ`. The denominator comes from a
//! linearized Padé system solved by SVD; positions and weights are then
//! polished by least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lm::{minimize, LmConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PoleTerm {
    pub t: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RationalFit {
    pub terms: Vec<PoleTerm>,
    pub constant: f64,
}

pub(crate) struct PoleSearch<'a> {
    pub max_degree: usize,
    pub regularization: f64,
    /// Fail instead of falling back to the best-conditioned degree.
    pub strict: bool,
    pub with_constant: bool,
    pub merge_gap: f64,
    /// Maps a pole parameter `t` to an eigenvalue, rejecting unphysical ones.
    pub to_lambda: &'a dyn Fn(f64) -> Option<f64>,
    /// Round first-order weights to positive half-integers and refit the
    /// rest with them held fixed.
    pub half_integer_alpha: bool,
}

/// Geometric growth rate of the tail of `s`, at least 1.
fn growth_rate(s: &[f64]) -> f64 {
    let r = s.len() - 1;
    let half = r / 2;
    if r < 2 {
        return 1.0;
    }
    let hi = s[half..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = s[..half.max(1)].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if hi == 0.0 || lo == 0.0 {
        return 1.0;
    }
    let g = (hi / lo).powf(1.0 / (r + 1 - half) as f64);
    if g.is_finite() { g.max(1.0) } else { 1.0 }
}

/// Roots of `c₀ yᵐ + c₁ yᵐ⁻¹ + … + c_m` via the companion matrix.
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let size = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // leading coefficients that vanish only lower the degree
    let start = c.iter().position(|v| v.abs() > 1e-14 * size).unwrap_or(c.len());
    let c = &c[start.min(c.len())..];
    if c.len() < 2 || c.iter().any(|v| !v.is_finite()) {
        return Vec::new();
    }
    let lead = c[0];
    let m = c.len() - 1;
    let mut comp = DMatrix::zeros(m, m);
    for j in 0..m {
        comp[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    if comp.iter().any(|v| !v.is_finite()) {
        return Vec::new();
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

fn denominator(s: &[f64], m: usize, with_constant: bool) -> Option<(f64, Vec<f64>)> {
    let first = if with_constant { m + 1 } else { m };
    let r = s.len() - 1;
    if r < first || r + 1 - first < m + 1 {
        return None;
    }
    let rows = r + 1 - first;
    let a = DMatrix::from_fn(rows, m + 1, |i, j| s[first + i - j]);
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    let (imin, smin) = sv.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
    let smax = sv.max();
    let vt = svd.v_t.expect("requested V");
    let q: Vec<f64> = vt.row(imin).iter().copied().collect();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    log::trace!("degree {m}: rows {rows}, singular values {:?}", sv.as_slice());
    Some((ratio, q))
}

fn basis(t: f64, n: usize) -> (f64, f64) {
    (t.powi(n as i32 + 1), (n + 1) as f64 * t.powi(n as i32))
}

/// Weighted least squares for `α, β` (and `K`) at fixed pole positions.
fn linear_weights(s: &[f64], ts: &[f64], with_constant: bool, scale: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let cols = 2 * ts.len() + usize::from(with_constant);
    let rows = s.len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    for n in 0..rows {
        let w = scale.powi(-(n as i32));
        for (i, &t) in ts.iter().enumerate() {
            let (f1, f2) = basis(t, n);
            a[(n, 2 * i)] = f1 * w;
            a[(n, 2 * i + 1)] = f2 * w;
        }
        if with_constant && n == 0 {
            a[(0, cols - 1)] = 1.0;
        }
        b[n] = s[n] * w;
    }
    if cols == 0 || a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return (vec![0.0; ts.len()], vec![0.0; ts.len()], 0.0);
    }
    let x = a.svd(true, true).solve(&b, 1e-15).unwrap_or_else(|_| DVector::zeros(cols));
    let alpha = (0..ts.len()).map(|i| x[2 * i]).collect();
    let beta = (0..ts.len()).map(|i| x[2 * i + 1]).collect();
    let k = if with_constant { x[cols - 1] } else { 0.0 };
    (alpha, beta, k)
}

/// Joint refinement of positions and weights.
fn refine(
    s: &[f64],
    ts: &[f64],
    alpha: &[f64],
    beta: &[f64],
    k: f64,
    with_constant: bool,
    scale: f64,
    fixed_alpha: bool,
    fixed_beta: &[bool],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let np = ts.len();
    let nv = 3 * np + usize::from(with_constant);
    let mut x0 = DVector::zeros(nv);
    for i in 0..np {
        x0[3 * i] = ts[i];
        x0[3 * i + 1] = alpha[i];
        x0[3 * i + 2] = beta[i];
    }
    if with_constant {
        x0[nv - 1] = k;
    }
    let rows = s.len();
    let cfg = LmConfig { max_iterations: 200, ..Default::default() };
    let out = minimize(x0.clone(), &vec![None; nv], &cfg, |x| {
        let mut r = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, nv);
        for n in 0..rows {
            let w = scale.powi(-(n as i32));
            let mut model = if with_constant && n == 0 { x[nv - 1] } else { 0.0 };
            for i in 0..np {
                let (t, a, b) = (x[3 * i], x[3 * i + 1], x[3 * i + 2]);
                let (f1, f2) = basis(t, n);
                model += a * f1 + b * f2;
                let nf = n as f64;
                let df1 = (nf + 1.0) * t.powi(n as i32);
                let df2 = if n == 0 { 0.0 } else { (nf + 1.0) * nf * t.powi(n as i32 - 1) };
                j[(n, 3 * i)] = (a * df1 + b * df2) * w;
                j[(n, 3 * i + 1)] = if fixed_alpha { 0.0 } else { f1 * w };
                j[(n, 3 * i + 2)] = if fixed_beta.get(i).copied().unwrap_or(false) { 0.0 } else { f2 * w };
            }
            if with_constant && n == 0 {
                j[(0, nv - 1)] = 1.0;
            }
            r[n] = (model - s[n]) * w;
        }
        r.iter().all(|v| v.is_finite()).then_some((r, j))
    });
    if let Some(o) = &out {
        log::trace!("pole refinement: cost {:e} after {} iterations", o.cost, o.iterations);
    }
    let x = out.map(|o| o.x).unwrap_or(x0);
    let ts = (0..np).map(|i| x[3 * i]).collect();
    let alpha = (0..np).map(|i| x[3 * i + 1]).collect();
    let beta = (0..np).map(|i| x[3 * i + 2]).collect();
    let k = if with_constant { x[nv - 1] } else { 0.0 };
    (ts, alpha, beta, k)
}

pub(crate) fn find_poles(s: &[f64], search: &PoleSearch<'_>) -> Result<RationalFit> {
    if s.len() < 3 {
        return Err(Error::Conditioning(format!("only {} coefficients available", s.len())));
    }
    let scale = growth_rate(s);
    let scaled: Vec<f64> = s.iter().enumerate().map(|(n, v)| v * scale.powi(-(n as i32))).collect();

    // Every degree whose system is numerically singular is a candidate; the
    // smallest one can miss the second order of a weak double pole, so the
    // refined fits are compared.
    let mut passing = Vec::new();
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut ratios = Vec::new();
    for m in 1..=search.max_degree {
        let Some((ratio, q)) = denominator(&scaled, m, search.with_constant) else { break };
        ratios.push(ratio);
        if best.as_ref().is_none_or(|b| ratio < b.1) {
            best = Some((m, ratio, q.clone()));
        }
        if ratio <= search.regularization {
            passing.push((m, ratio, q));
        }
    }
    if passing.is_empty() {
        match best {
            Some(b) if !search.strict => passing.push(b),
            _ => {
                return Err(Error::Conditioning(format!(
                    "no Padé denominator up to degree {} reaches singular value ratio {:e} (ratios {:?})",
                    search.max_degree, search.regularization, ratios
                )))
            }
        }
    }

    let mut fits: Vec<(f64, RationalFit)> = passing
        .iter()
        .map(|(degree, ratio, q)| {
            let fit = fit_from_denominator(s, q, scale, search);
            log::debug!("Padé degree {degree}, singular value ratio {ratio:e}, refined residual {:e}", fit.0);
            fit
        })
        .collect();
    // earlier degrees win unless a later one is clearly better
    let mut pick = 0;
    for i in 1..fits.len() {
        if fits[i].0 < 0.5 * fits[pick].0 {
            pick = i;
        }
    }
    Ok(fits.swap_remove(pick).1)
}

/// Refits positions, second-order weights and the constant of `fit` with its
/// first-order weights held fixed. Second-order weights flagged in
/// `zero_beta` are pinned to zero. Returns the fit and its scaled residual.
pub(crate) fn refine_positions(s: &[f64], fit: &RationalFit, zero_beta: &[bool], search: &PoleSearch<'_>) -> (f64, RationalFit) {
    let scale = growth_rate(s);
    if fit.terms.is_empty() {
        return (fit_residual(s, fit, scale), fit.clone());
    }
    let ts: Vec<f64> = fit.terms.iter().map(|p| p.t).collect();
    let alpha: Vec<f64> = fit.terms.iter().map(|p| p.alpha).collect();
    let beta: Vec<f64> = fit.terms.iter().zip(zero_beta).map(|(p, &z)| if z { 0.0 } else { p.beta }).collect();
    let (ts, alpha, beta, k) = refine(s, &ts, &alpha, &beta, fit.constant, search.with_constant, scale, true, zero_beta);
    let terms = ts
        .iter()
        .zip(alpha.iter().zip(&beta))
        .filter_map(|(&t, (&alpha, &beta))| (search.to_lambda)(t).map(|lambda| PoleTerm { t, lambda, alpha, beta }))
        .collect();
    let fit = RationalFit { terms, constant: k };
    (fit_residual(s, &fit, scale), fit)
}

fn fit_residual(s: &[f64], fit: &RationalFit, scale: f64) -> f64 {
    s.iter()
        .enumerate()
        .map(|(n, v)| {
            let mut model = if n == 0 { fit.constant } else { 0.0 };
            for p in &fit.terms {
                let (f1, f2) = basis(p.t, n);
                model += p.alpha * f1 + p.beta * f2;
            }
            ((model - v) * scale.powi(-(n as i32))).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn fit_from_denominator(s: &[f64], q: &[f64], scale: f64, search: &PoleSearch<'_>) -> (f64, RationalFit) {
    // q(x) = Σ qⱼ xʲ vanishes at x = 1/t̃, i.e. Σ qⱼ t̃^{m−j} = 0
    let mut poles: Vec<(f64, f64)> = poly_roots(q)
        .into_iter()
        .filter(|r| r.norm() > 0.0 && r.im.abs() <= 0.05 * r.norm() + 1e-10)
        .filter_map(|r| {
            let t = r.re * scale;
            (search.to_lambda)(t).map(|l| (l, t))
        })
        .collect();
    poles.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for p in poles {
        match clusters.last_mut() {
            Some(c) if (c.last().unwrap().0 - p.0).abs() <= search.merge_gap * c.last().unwrap().0.max(p.0) => c.push(p),
            _ => clusters.push(vec![p]),
        }
    }
    let ts: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().map(|p| p.1).sum::<f64>() / c.len() as f64)
        .collect();

    let (alpha, beta, k) = linear_weights(s, &ts, search.with_constant, scale);
    let (ts, alpha, beta, k) = if ts.is_empty() {
        (ts, alpha, beta, k)
    } else {
        refine(s, &ts, &alpha, &beta, k, search.with_constant, scale, false, &[])
    };
    let terms = ts
        .iter()
        .zip(alpha.iter().zip(&beta))
        .filter_map(|(&t, (&alpha, &beta))| (search.to_lambda)(t).map(|lambda| PoleTerm { t, lambda, alpha, beta }))
        .collect();
    let mut fit = RationalFit { terms, constant: k };
    // drop poles that contribute nothing beyond rounding noise
    let size = s.iter().enumerate().fold(0.0f64, |m, (n, v)| m.max((v * scale.powi(-(n as i32))).abs()));
    fit.terms.retain(|p| {
        (0..s.len()).any(|n| {
            let (f1, f2) = basis(p.t, n);
            ((p.alpha * f1 + p.beta * f2) * scale.powi(-(n as i32))).abs() > 1e-10 * size
        })
    });
    let mut residual = fit_residual(s, &fit, scale);
    if search.half_integer_alpha {
        (residual, fit) = round_alpha(s, fit, search);
    }
    (if residual.is_finite() { residual } else { f64::INFINITY }, fit)
}

fn round_alpha(s: &[f64], mut fit: RationalFit, search: &PoleSearch<'_>) -> (f64, RationalFit) {
    fit.terms.retain(|p| (2.0 * p.alpha).round() >= 1.0);
    for p in &mut fit.terms {
        p.alpha = (2.0 * p.alpha).round() / 2.0;
    }
    let (residual, fit) = refine_positions(s, &fit, &vec![false; fit.terms.len()], search);
    // a nearly vanishing second-order weight is usually a slightly misplaced
    // simple pole
    let tiny: Vec<bool> = fit.terms.iter().map(|p| (2.0 * p.beta).abs() < 1e-4).collect();
    if tiny.iter().any(|&t| t) {
        let (snapped, candidate) = refine_positions(s, &fit, &tiny, search);
        if candidate.terms.len() == fit.terms.len() && snapped <= (2.0 * residual).max(1e-13) {
            return (snapped, candidate);
        }
    }
    (residual, fit)
}
