//! Small bound-constrained Levenberg–Marquardt solver for dense problems
//! with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when a step changes the cost by less than this fraction.
    pub ftol: f64,
    /// Stop when the step is this small relative to the parameters.
    pub xtol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iterations: 200, ftol: 1e-15, xtol: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `½‖r‖²` at `x`.
    pub cost: f64,
    pub iterations: usize,
}

fn project(x: &mut DVector<f64>, lower: &[Option<f64>]) {
    for (xi, lo) in x.iter_mut().zip(lower) {
        if let Some(lo) = lo {
            if *xi < *lo {
                *xi = *lo;
            }
        }
    }
}

/// Minimizes `½‖r(x)‖²` subject to `xᵢ ≥ lowerᵢ`; `model` returns the
/// residuals and their Jacobian, or `None` where the model is undefined.
pub fn minimize<F>(x0: DVector<f64>, lower: &[Option<f64>], cfg: &LmConfig, mut model: F) -> Option<LmOutcome>
where
    F: FnMut(&DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)>,
{
    let mut x = x0;
    project(&mut x, lower);
    let (mut r, mut jac) = model(&x)?;
    let mut cost = 0.5 * r.norm_squared();
    let mut mu = 1e-3;
    let mut iterations = 0;

    let n = x.len();
    while iterations < cfg.max_iterations && cost > 0.0 {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let max_diag = jtj.diagonal().max().max(f64::MIN_POSITIVE);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * (jtj[(i, i)] + 1e-12 * max_diag);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&-&grad),
                None => match a.svd(true, true).solve(&-&grad, 1e-14) {
                    Ok(s) => s,
                    Err(_) => break,
                },
            };
            let mut candidate = &x + &step;
            project(&mut candidate, lower);
            let actual_step = (&candidate - &x).norm();
            if actual_step <= cfg.xtol * (x.norm() + cfg.xtol) {
                return Some(LmOutcome { x, residuals: r, cost, iterations });
            }
            if let Some((rc, jc)) = model(&candidate) {
                let c = 0.5 * rc.norm_squared();
                if c.is_finite() && c < cost {
                    let relative = (cost - c) / cost;
                    x = candidate;
                    r = rc;
                    jac = jc;
                    cost = c;
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    if relative < cfg.ftol {
                        return Some(LmOutcome { x, residuals: r, cost, iterations });
                    }
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some(LmOutcome { x, residuals: r, cost, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let data: Vec<f64> = ts.iter().map(|t| 2.0 * (-1.3 * t).exp()).collect();
        let out = minimize(DVector::from_vec(vec![1.0, 0.5]), &[None, None], &LmConfig::default(), |x| {
            let r = DVector::from_fn(ts.len(), |i, _| x[0] * (-x[1] * ts[i]).exp() - data[i]);
            let j = DMatrix::from_fn(ts.len(), 2, |i, k| {
                let e = (-x[1] * ts[i]).exp();
                if k == 0 { e } else { -x[0] * ts[i] * e }
            });
            Some((r, j))
        })
        .unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-10 && (out.x[1] - 1.3).abs() < 1e-10);
    }

    #[test]
    fn respects_lower_bounds() {
        // minimum of (x + 1)² is at −1, constrained to x ≥ 0
        let out = minimize(DVector::from_vec(vec![3.0]), &[Some(0.0)], &LmConfig::default(), |x| {
            Some((DVector::from_vec(vec![x[0] + 1.0]), DMatrix::from_element(1, 1, 1.0)))
        })
        .unwrap();
        assert_eq!(out.x[0], 0.0);
    }
}
