use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::pade::{find_poles, PoleSearch, PoleTerm};
use super::{g_series_from_distribution, logderiv_series, pade_poles, InversionConfig, InversionResult, PoleEstimate};
use crate::decompositions::{validate_normal_parameters, NormalParameters, NormalTriple};
use crate::error::{Error, Result};
use crate::lm::{minimize, LmConfig};
use crate::photon::PhotonDistribution;
use crate::series::TruncatedSeries;

/// One eigenvalue in the fit, parametrized by `θ = ½ ln λ` (so that
/// `c = (λ−1)/(λ+1) = tanh θ`) and `u = d² ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Component {
    theta: f64,
    u: f64,
    k: usize,
}

impl Component {
    fn from_lambda(lambda: f64, d2: f64, k: usize) -> Self {
        Self { theta: 0.5 * lambda.ln(), u: d2.max(0.0), k }
    }

    fn lambda(&self) -> f64 {
        (2.0 * self.theta).exp()
    }
}

const THETA_LIMIT: f64 = 10.0;

/// `(1 − w)·x`, truncated.
fn one_minus_w(x: &TruncatedSeries) -> TruncatedSeries {
    x - &x.shift_up()
}

/// Probability generating function built as `exp(Σᵢ ln hᵢ)` with
/// `ln hᵢ = (k/2) ln(1−c) − (k/2) ln(1−cw) − (u(1−c)/2)(1−w)/(1−cw)`.
fn model_pgf(comps: &[Component], order: usize) -> Option<TruncatedSeries> {
    let mut log = vec![0.0; order + 1];
    for comp in comps {
        let c = comp.theta.tanh();
        let half_k = comp.k as f64 / 2.0;
        let beta = comp.u * (1.0 - c) * (1.0 - c) / 2.0;
        log[0] += half_k * (1.0 - c).ln() - comp.u * (1.0 - c) / 2.0;
        let mut cn = 1.0;
        for (n, l) in log.iter_mut().enumerate().skip(1) {
            // cn = c^{n−1}
            *l += half_k * cn * c / n as f64 + beta * cn;
            cn *= c;
        }
    }
    TruncatedSeries::new(log).exp().ok()
}

/// Residuals `p_model − p` and their Jacobian in `(θ₁…θ_N, u₁…u_N)`.
fn residuals(comps: &[Component], target: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
    if comps.iter().any(|c| c.theta.abs() > THETA_LIMIT) {
        return None;
    }
    let m = target.len() - 1;
    let p = model_pgf(comps, m)?;
    let n = comps.len();
    let r = DVector::from_fn(m + 1, |i, _| p.coeff(i) - target[i]);
    let mut jac = DMatrix::zeros(m + 1, 2 * n);
    let one_minus_p = one_minus_w(&p);
    for (i, comp) in comps.iter().enumerate() {
        let c = comp.theta.tanh();
        let half_k = comp.k as f64 / 2.0;
        // ∂ ln h/∂c = −(k/2)/(1−c) + (k/2) w/(1−cw) + (u/2)(1−w)²/(1−cw)²
        let dc = &(&p.scale(-half_k / (1.0 - c)) + &p.shift_up().div_one_minus(c).scale(half_k))
            + &one_minus_w(&one_minus_p).div_one_minus(c).div_one_minus(c).scale(comp.u / 2.0);
        // ∂ ln h/∂u = −((1−c)/2)(1−w)/(1−cw)
        let du = one_minus_p.div_one_minus(c).scale(-(1.0 - c) / 2.0);
        let dtheta = 1.0 - c * c;
        for row in 0..=m {
            jac[(row, i)] = dc.coeff(row) * dtheta;
            jac[(row, n + i)] = du.coeff(row);
        }
    }
    r.iter().all(|v| v.is_finite()).then_some((r, jac))
}

#[derive(Clone, Debug)]
struct Outcome {
    comps: Vec<Component>,
    residual: f64,
}

impl Outcome {
    fn key(&self) -> Vec<usize> {
        self.comps.iter().map(|c| c.k).collect()
    }
}

fn sort_desc(comps: &mut [Component]) {
    comps.sort_by(|a, b| b.theta.total_cmp(&a.theta));
}

/// Joins components whose eigenvalues are within `gap` relative.
fn merge_close(mut comps: Vec<Component>, gap: f64) -> Vec<Component> {
    sort_desc(&mut comps);
    let mut out: Vec<Component> = Vec::with_capacity(comps.len());
    for c in comps {
        match out.last_mut() {
            Some(last) if (last.lambda() - c.lambda()).abs() <= gap * last.lambda().max(c.lambda()) => {
                let k = last.k + c.k;
                last.theta = (last.theta * last.k as f64 + c.theta * c.k as f64) / k as f64;
                last.u += c.u;
                last.k = k;
            }
            _ => out.push(c),
        }
    }
    out
}

/// Makes the multiplicities add up to `2S`, parking any deficit on `λ = 1`.
fn complete(mut comps: Vec<Component>, modes: usize) -> Option<Vec<Component>> {
    comps.retain(|c| c.k > 0);
    let target = 2 * modes;
    let mut total: usize = comps.iter().map(|c| c.k).sum();
    while total > target {
        let i = (0..comps.len()).max_by_key(|&i| (comps[i].k, usize::MAX - i))?;
        comps[i].k -= 1;
        total -= 1;
        if comps[i].k == 0 {
            comps.remove(i);
        }
    }
    if total < target {
        match comps.iter_mut().find(|c| c.theta.abs() < 1e-3) {
            Some(c) => c.k += target - total,
            None => comps.push(Component { theta: 0.0, u: 0.0, k: target - total }),
        }
    }
    sort_desc(&mut comps);
    (!comps.is_empty()).then_some(comps)
}

fn max_abs(r: &DVector<f64>) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Least squares at fixed multiplicities; `frozen[i]` pins `uᵢ = 0`.
fn fit_frozen(target: &[f64], init: &[Component], frozen: &[bool], cfg: &InversionConfig) -> Option<Outcome> {
    let n = init.len();
    let free: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
    let nv = n + free.len();
    let x0 = DVector::from_iterator(nv, init.iter().map(|c| c.theta).chain(free.iter().map(|&i| init[i].u)));
    let lower: Vec<Option<f64>> = (0..nv).map(|i| (i >= n).then_some(0.0)).collect();
    let unpack = |x: &DVector<f64>| -> Vec<Component> {
        let mut comps: Vec<Component> = (0..n).map(|i| Component { theta: x[i], u: 0.0, k: init[i].k }).collect();
        for (slot, &i) in free.iter().enumerate() {
            comps[i].u = x[n + slot];
        }
        comps
    };
    let lm = LmConfig { max_iterations: cfg.max_iterations, ..Default::default() };
    let out = minimize(x0, &lower, &lm, |x| {
        let (r, jac) = residuals(&unpack(x), target)?;
        let cols: Vec<usize> = (0..n).chain(free.iter().map(|&i| n + i)).collect();
        Some((r, jac.select_columns(&cols)))
    })?;
    log::trace!("fit_frozen: start {:?} frozen {:?} -> {:?} after {} its, cost {:e}", init, frozen, unpack(&out.x), out.iterations, out.cost);
    Some(Outcome { comps: unpack(&out.x), residual: max_abs(&out.residuals) })
}

/// Near `u = 0` a change of `u` mimics a change of `θ` to first order, so a
/// tiny fitted `u` is indistinguishable from zero displacement; such values
/// are pinned to zero whenever the data stay explained.
const SNAP_U: f64 = 2e-2;

fn fit_fixed_k(target: &[f64], init: &[Component], cfg: &InversionConfig) -> Option<Outcome> {
    let n = init.len();
    let mut frozen = vec![false; n];
    let mut best = fit_frozen(target, init, &frozen, cfg)?;
    // snapping one component can push another's displacement towards zero
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if frozen[i] || best.residual > cfg.fit_tolerance || best.comps[i].u == 0.0 || best.comps[i].u >= SNAP_U {
                continue;
            }
            frozen[i] = true;
            let tolerated = (2.0 * best.residual).max(1e-13);
            match fit_frozen(target, &best.comps, &frozen, cfg) {
                Some(o) if o.residual <= tolerated => {
                    best = o;
                    changed = true;
                }
                _ => frozen[i] = false,
            }
        }
    }

    // eigenvalues that converged onto each other are one eigenvalue
    let merged = merge_close(best.comps.clone(), 1e-6);
    if merged.len() < n {
        return fit_fixed_k(target, &merged, cfg);
    }
    sort_desc(&mut best.comps);
    Some(best)
}

/// Initial guesses from the poles of `P′(w)/P(w)`, which sit at `w = 1/cᵢ`:
/// `P′/P = d₀²/2 + Σᵢ [(kᵢ/2) cᵢ/(1 − cᵢw) + (dᵢ²(1−cᵢ)²/2)/(1 − cᵢw)²]`.
fn w_route(p: &PhotonDistribution, modes: usize, cfg: &InversionConfig) -> Option<Vec<Component>> {
    let probs = TruncatedSeries::new(p.probs().to_vec());
    if probs.order() < 2 {
        return None;
    }
    let r = probs.log_derivative().ok()?;
    let to_lambda = |c: f64| (c > -1.0 && c < 1.0).then(|| (1.0 + c) / (1.0 - c));
    let search = PoleSearch {
        max_degree: 2 * cfg.max_components_for(modes),
        regularization: cfg.regularization,
        strict: false,
        with_constant: true,
        merge_gap: cfg.merge_gap,
        to_lambda: &to_lambda,
        half_integer_alpha: false,
    };
    let fit = find_poles(r.coeffs(), &search).ok()?;
    log::trace!("w-route poles {:?}, constant {}", fit.terms, fit.constant);
    // a pole next to w = 0 is hard to tell apart from the constant; both
    // describe displacement at λ ≈ 1
    let mut constant = fit.constant;
    let (central, outer): (Vec<&PoleTerm>, Vec<&PoleTerm>) = fit.terms.iter().partition(|t| t.t.abs() < 0.02 && (2.0 * t.alpha).round() < 1.0);
    for t in central {
        constant += t.beta + t.alpha * t.t;
    }
    let mut comps: Vec<Component> = outer
        .into_iter()
        .filter_map(|t| {
            let k = (2.0 * t.alpha).round();
            (k >= 1.0).then(|| Component::from_lambda(t.lambda, 2.0 * t.beta / ((1.0 - t.t) * (1.0 - t.t)), k as usize))
        })
        .collect();
    // the constant belongs to λ = 1, which carries whatever multiplicity is
    // left over
    let vac_u = 2.0 * constant;
    let total: usize = comps.iter().map(|c| c.k).sum();
    if vac_u > 1e-8 {
        match comps.iter_mut().find(|c| c.theta.abs() < 1e-3) {
            Some(v) => v.u += vac_u,
            None if total < 2 * modes => comps.push(Component { theta: 0.0, u: vac_u, k: 2 * modes - total }),
            None => {}
        }
    }
    complete(merge_close(comps, cfg.merge_gap), modes)
}

/// Initial guesses from the Padé poles of the moment series in `z`.
fn z_route(p: &PhotonDistribution, modes: usize, cfg: &InversionConfig) -> Option<Vec<Component>> {
    let jmax = cfg.jmax_for(modes);
    let g = g_series_from_distribution(p, modes, jmax).ok()?;
    let l = logderiv_series(&g).ok()?;
    let cfg = InversionConfig { pade_order: Some(cfg.pade_order_for(modes)), ..*cfg };
    let poles = pade_poles(&l, &cfg).ok()?;
    let comps = poles.iter().map(|e| Component::from_lambda(e.lambda, e.d * e.d, e.k)).collect();
    complete(merge_close(comps, cfg.merge_gap), modes)
}

/// Neighbouring multiplicity assignments: move one unit between two
/// eigenvalues, split one eigenvalue in two, or merge two neighbours.
fn neighbours(comps: &[Component], max_components: usize) -> Vec<Vec<Component>> {
    let n = comps.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && comps[j].k >= 2 {
                let mut v = comps.to_vec();
                v[i].k += 1;
                v[j].k -= 1;
                out.push(v);
            }
        }
    }
    if n < max_components {
        for i in 0..n {
            if comps[i].k >= 2 {
                for delta in [0.15, -0.15] {
                    let mut v = comps.to_vec();
                    let lo = v[i].k / 2;
                    v[i].k -= lo;
                    v[i].u /= 2.0;
                    let mut extra = v[i];
                    extra.k = lo;
                    extra.theta += delta;
                    v.push(extra);
                    sort_desc(&mut v);
                    out.push(v);
                }
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        let mut v = comps.to_vec();
        let b = v.remove(i + 1);
        let k = v[i].k + b.k;
        v[i].theta = (v[i].theta * v[i].k as f64 + b.theta * b.k as f64) / k as f64;
        v[i].u += b.u;
        v[i].k = k;
        out.push(v);
    }
    out
}

/// Fitted eigenvalues of a (nearly) pure state can violate the pairing
/// condition by rounding; nudges the smaller eigenvalue of each offending
/// pair up onto the boundary when the fit stays as good.
fn project_pairing(best: &Outcome, target: &[f64], modes: usize, cfg: &InversionConfig) -> Option<Outcome> {
    let params = to_params(&best.comps, modes);
    let report = validate_normal_parameters(&params);
    if report.valid || !report.even_dimension || report.min_pairing_product < 1.0 - 1e-6 {
        return None;
    }
    // expanded spectrum as (component, copy) slots, descending
    let slots: Vec<usize> = best.comps.iter().enumerate().flat_map(|(i, c)| std::iter::repeat_n(i, c.k)).collect();
    let n = slots.len();
    let mut partner: Vec<Option<usize>> = vec![None; best.comps.len()];
    for j in 0..n / 2 {
        let (hi, lo) = (slots[j], slots[n - 1 - j]);
        if (best.comps[hi].theta + best.comps[lo].theta).abs() > 1e-6 {
            continue;
        }
        for (a, b) in [(hi, lo), (lo, hi)] {
            match partner[a] {
                Some(p) if p != b => return None,
                _ => partner[a] = Some(b),
            }
        }
    }
    if partner.iter().enumerate().any(|(i, p)| p.is_some_and(|j| best.comps[i].k != best.comps[j].k && i != j)) {
        return None;
    }
    let projected = fit_paired(target, &best.comps, &partner, cfg)?;
    log::debug!("pairing projection: residual {:e} -> {:e}", best.residual, projected.residual);
    (validate_normal_parameters(&to_params(&projected.comps, modes)).valid && projected.residual <= (2.0 * best.residual).max(cfg.fit_tolerance))
        .then_some(projected)
}

/// Least squares with `θⱼ = −θᵢ` imposed for every `partner[i] = Some(j)`
/// (and `θᵢ = 0` when a component is its own partner).
fn fit_paired(target: &[f64], init: &[Component], partner: &[Option<usize>], cfg: &InversionConfig) -> Option<Outcome> {
    let n = init.len();
    // θ = A·v over the independent eigenvalues
    let leaders: Vec<usize> = (0..n).filter(|&i| partner[i].is_none_or(|j| i < j)).collect();
    let nl = leaders.len();
    let mut a = DMatrix::zeros(n, nl);
    for (col, &i) in leaders.iter().enumerate() {
        a[(i, col)] = 1.0;
        if let Some(j) = partner[i] {
            a[(j, col)] = -1.0;
        }
    }
    let x0 = DVector::from_iterator(nl + n, leaders.iter().map(|&i| init[i].theta).chain(init.iter().map(|c| c.u)));
    let lower: Vec<Option<f64>> = (0..nl + n).map(|i| (i >= nl).then_some(0.0)).collect();
    let unpack = |x: &DVector<f64>| -> Vec<Component> {
        let theta = &a * x.rows(0, nl);
        (0..n).map(|i| Component { theta: theta[i], u: x[nl + i], k: init[i].k }).collect()
    };
    let lm = LmConfig { max_iterations: cfg.max_iterations, ..Default::default() };
    let out = minimize(x0, &lower, &lm, |x| {
        let (r, jac) = residuals(&unpack(x), target)?;
        let mut j = DMatrix::zeros(r.len(), nl + n);
        j.columns_mut(0, nl).copy_from(&(jac.columns(0, n) * &a));
        j.columns_mut(nl, n).copy_from(&jac.columns(n, n));
        Some((r, j))
    })?;
    let mut comps = unpack(&out.x);
    // exact pairing after rounding
    for i in 0..n {
        if let Some(j) = partner[i] {
            if i == j {
                comps[i].theta = 0.0;
            } else if i < j {
                comps[j].theta = -comps[i].theta;
            }
        }
    }
    let (r, _) = residuals(&comps, target)?;
    Some(Outcome { comps, residual: max_abs(&r) })
}

fn best_of(outcomes: impl IntoIterator<Item = Outcome>) -> Option<Outcome> {
    outcomes.into_iter().min_by(|a, b| a.residual.total_cmp(&b.residual).then_with(|| a.key().cmp(&b.key())))
}

fn to_params(comps: &[Component], modes: usize) -> NormalParameters {
    NormalParameters::new(
        modes,
        comps.iter().map(|c| NormalTriple::new(c.lambda(), c.k, c.u.max(0.0).sqrt())).collect(),
    )
}

/// Least-squares fit of normal parameters to a photon-number distribution.
///
/// Starting points come from two pole estimates (the moment series in `z`
/// and the probability generating function in `w`). Each is refined with
/// multiplicities held fixed; if the fit is not within tolerance,
/// neighbouring multiplicity assignments are tried in parallel.
pub fn fit_normal_parameters(p: &PhotonDistribution, modes: usize, cfg: &InversionConfig) -> Result<InversionResult> {
    if modes == 0 {
        return Err(Error::Domain("the mode count must be positive".into()));
    }
    let target = p.probs();
    let max_components = cfg.max_components_for(modes);

    let mut starts: Vec<Vec<Component>> = [w_route(p, modes, cfg), z_route(p, modes, cfg)]
        .into_iter()
        .flatten()
        .filter(|c| c.len() <= max_components)
        .collect();
    starts.push(vec![Component { theta: 0.0, u: 0.0, k: 2 * modes }]);
    starts.dedup();
    log::debug!("initial guesses: {starts:?}");

    let mut best = best_of(starts.par_iter().filter_map(|s| fit_fixed_k(target, s, cfg)).collect::<Vec<_>>())
        .ok_or_else(|| Error::Conditioning("no initial guess could be evaluated".into()))?;

    for round in 0..4 {
        if best.residual <= cfg.fit_tolerance {
            break;
        }
        log::debug!("round {round}: residual {:e} for {:?}", best.residual, best.comps);
        let candidates = neighbours(&best.comps, max_components);
        let found = best_of(candidates.par_iter().filter_map(|s| fit_fixed_k(target, s, cfg)).collect::<Vec<_>>());
        match found {
            Some(f) if f.residual < best.residual => best = f,
            _ => break,
        }
    }

    // fewer eigenvalues are preferred whenever they explain the data as well
    while best.residual <= cfg.fit_tolerance && best.comps.len() > 1 {
        let merges: Vec<Vec<Component>> = (0..best.comps.len() - 1)
            .map(|i| {
                let mut v = best.comps.clone();
                let b = v.remove(i + 1);
                let k = v[i].k + b.k;
                v[i].theta = (v[i].theta * v[i].k as f64 + b.theta * b.k as f64) / k as f64;
                v[i].u += b.u;
                v[i].k = k;
                v
            })
            .collect();
        match best_of(merges.par_iter().filter_map(|s| fit_fixed_k(target, s, cfg)).collect::<Vec<_>>()) {
            Some(f) if f.residual <= cfg.fit_tolerance => best = f,
            _ => break,
        }
    }
    if let Some(projected) = project_pairing(&best, target, modes, cfg) {
        best = projected;
    }

    let params = to_params(&best.comps, modes);
    let valid = validate_normal_parameters(&params).valid;
    let pole_report = params.triples().iter().map(PoleEstimate::from_triple).collect();
    Ok(InversionResult {
        converged: valid && best.residual <= cfg.fit_tolerance && params.len() <= max_components,
        residual: best.residual,
        params,
        pole_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::{photon_distribution, DistributionConfig};

    fn params(modes: usize, t: &[(f64, usize, f64)]) -> NormalParameters {
        NormalParameters::new(modes, t.iter().map(|&(l, k, d)| NormalTriple::new(l, k, d)).collect())
    }

    #[test]
    fn model_matches_forward_map() {
        let f = params(2, &[(5.0, 1, 0.7), (1.0, 2, 0.4), (0.3, 1, 0.0)]);
        let p = photon_distribution(&f, &DistributionConfig { nmax: Some(60), ..Default::default() }).unwrap();
        let comps: Vec<Component> = f.triples().iter().map(|t| Component::from_lambda(t.lambda, t.d * t.d, t.k)).collect();
        let m = model_pgf(&comps, 60).unwrap();
        for n in 0..=60 {
            assert!((m.coeff(n) - p.get(n)).abs() < 1e-14, "{n}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let comps = vec![
            Component { theta: 0.6, u: 0.5, k: 1 },
            Component { theta: -0.3, u: 1.2, k: 3 },
        ];
        let target = vec![0.0; 31];
        let (r, j) = residuals(&comps, &target).unwrap();
        let h = 1e-6;
        for col in 0..4 {
            let mut c = comps.clone();
            if col < 2 {
                c[col].theta += h;
            } else {
                c[col - 2].u += h;
            }
            let (r2, _) = residuals(&c, &target).unwrap();
            for row in 0..31 {
                let fd = (r2[row] - r[row]) / h;
                assert!((fd - j[(row, col)]).abs() < 1e-5, "col {col} row {row}: {fd} vs {}", j[(row, col)]);
            }
        }
    }

    fn round_trip(f: &NormalParameters) -> InversionResult {
        let p = photon_distribution(f, &DistributionConfig::default()).unwrap();
        fit_normal_parameters(&p, f.modes(), &InversionConfig::default()).unwrap()
    }

    #[test]
    fn vacuum_is_recovered_exactly() {
        for s in 1..=3 {
            let res = round_trip(&NormalParameters::vacuum(s));
            assert!(res.converged && res.residual < 1e-12);
            assert_eq!(res.params.triples().len(), 1);
            assert_eq!(res.params.triples()[0].k, 2 * s);
            assert!((res.params.triples()[0].lambda - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn squeezed_displaced_mode() {
        let e2 = 2f64.exp();
        let f = params(1, &[(e2, 1, 2f64.sqrt()), (1.0 / e2, 1, 0.0)]);
        let p = photon_distribution(&f, &DistributionConfig { nmax: Some(60), ..Default::default() }).unwrap();
        let res = fit_normal_parameters(&p, 1, &InversionConfig::default()).unwrap();
        assert!(res.converged, "{res:?}");
        assert!(res.params.approx_eq(&f, 1e-6, 1e-6), "{:?}", res.params);
    }

    #[test]
    fn thermal_state() {
        let f = params(1, &[(3.0, 2, 0.0)]);
        let res = round_trip(&f);
        assert!(res.converged && res.params.approx_eq(&f, 1e-8, 1e-6), "{res:?}");
        assert!((res.pole_report[0].z + 0.5).abs() < 1e-8);
    }
}
