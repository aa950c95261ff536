//! Recovery of normal parameters from a photon-number distribution.
//!
//! The logarithmic derivative of `G(z)` is
//!
//! ```text
//! L(z) = −Σᵢ [ (kᵢ/2)/(z − zᵢ) + 2dᵢ²λ′ᵢ²/(z − zᵢ)² ],   zᵢ = −2λ′ᵢ,
//! ```
//!
//! so the normal parameters are the positions and residues of its poles.
//! [`pade_poles`] reads them off a truncated moment series;
//! [`fit_normal_parameters`] turns such estimates into a least-squares fit
//! against the probabilities themselves.

mod fit;
mod pade;

use serde::{Deserialize, Serialize};

use crate::decompositions::{normal_parameters, NormalParameters, NormalTriple, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::photon::{antinormal_moments_from_distribution, lambda_prime, PhotonDistribution};
use crate::series::TruncatedSeries;

pub use fit::fit_normal_parameters;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Upper bound on the number of distinct eigenvalues; defaults to `2S`.
    pub max_components: Option<usize>,
    /// Highest Padé denominator degree; defaults to `jmax/2`.
    pub pade_order: Option<usize>,
    /// Moment order used for the `z`-series; defaults to `4 N_max + 4`, enough
    /// for every component to carry a double pole.
    pub jmax: Option<usize>,
    /// Largest accepted `max |p_model − p_input|`.
    pub fit_tolerance: f64,
    pub max_iterations: usize,
    /// Singular value ratio below which a Padé system is considered exact.
    pub regularization: f64,
    /// Relative eigenvalue gap below which candidate poles are merged.
    pub merge_gap: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            max_components: None,
            pade_order: None,
            jmax: None,
            fit_tolerance: 1e-10,
            max_iterations: 300,
            regularization: 1e-9,
            merge_gap: 0.1,
        }
    }
}

impl InversionConfig {
    pub fn max_components_for(&self, modes: usize) -> usize {
        self.max_components.unwrap_or(2 * modes).max(1)
    }

    pub fn jmax_for(&self, modes: usize) -> usize {
        self.jmax.unwrap_or(4 * self.max_components_for(modes) + 4)
    }

    pub fn pade_order_for(&self, modes: usize) -> usize {
        let half = self.jmax_for(modes) / 2;
        self.pade_order.unwrap_or(half).clamp(1, half.max(1))
    }
}

/// A pole of `L(z)` with its Laurent coefficients and the triple they imply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleEstimate {
    pub z: f64,
    /// Coefficient of `1/(z − zᵢ)`, equal to `−kᵢ/2`.
    pub first_order: f64,
    /// Coefficient of `1/(z − zᵢ)²`, equal to `−2dᵢ²λ′ᵢ²`.
    pub second_order: f64,
    pub lambda: f64,
    pub k: usize,
    pub d: f64,
}

impl PoleEstimate {
    pub fn from_triple(t: &NormalTriple) -> Self {
        let lp = lambda_prime(t.lambda);
        Self {
            z: -2.0 * lp,
            first_order: -(t.k as f64) / 2.0,
            second_order: -2.0 * t.d * t.d * lp * lp,
            lambda: t.lambda,
            k: t.k,
            d: t.d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub params: NormalParameters,
    /// `max |p_model(n) − p_input(n)|` over the input range.
    pub residual: f64,
    pub pole_report: Vec<PoleEstimate>,
    pub converged: bool,
}

/// Taylor coefficients `(−1)ʲ mⱼ/j!` of `G(z)`, with `mⱼ` the anti-normally
/// ordered moments of the distribution.
pub fn g_series_from_distribution(p: &PhotonDistribution, modes: usize, jmax: usize) -> Result<TruncatedSeries> {
    if p.tail_bound() > 1e-10 {
        return Err(Error::Truncation {
            message: format!("tail bound {:e} too large for moment extraction (need ≤ 1e-10)", p.tail_bound()),
            achieved: p.tail_bound(),
        });
    }
    let m = antinormal_moments_from_distribution(p, modes, jmax);
    for w in &m.warnings {
        log::warn!("{w}");
    }
    let mut fact = 1.0;
    let coeffs = m
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * v / fact
        })
        .collect();
    Ok(TruncatedSeries::new(coeffs))
}

/// `L(z) = G′(z)/G(z)` for a series normalized to `G(0) = 1`.
pub fn logderiv_series(g: &TruncatedSeries) -> Result<TruncatedSeries> {
    if (g.coeff(0) - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("G(0) must be 1, got {}", g.coeff(0))));
    }
    g.log_derivative()
}

/// Candidate poles of `L(z)` from a Padé approximant, refined by least
/// squares on the series coefficients with multiplicities rounded to
/// integers.
pub fn pade_poles(l: &TruncatedSeries, cfg: &InversionConfig) -> Result<Vec<PoleEstimate>> {
    let max_degree = cfg.pade_order.unwrap_or(l.order().div_ceil(2)).max(1);
    // With t = 1/zᵢ: Lₙ = Σ [(kᵢ/2) tⁿ⁺¹ − (dᵢ²/2)(n+1) tⁿ]
    let to_lambda = |t: f64| {
        let lp = -0.5 / t;
        (lp > 0.0 && lp < 1.0).then(|| 1.0 / lp - 1.0)
    };
    let search = pade::PoleSearch {
        max_degree,
        regularization: cfg.regularization,
        strict: true,
        with_constant: false,
        merge_gap: cfg.merge_gap,
        to_lambda: &to_lambda,
        half_integer_alpha: true,
    };
    let fit = pade::find_poles(l.coeffs(), &search)?;
    let mut poles: Vec<PoleEstimate> = fit
        .terms
        .iter()
        .map(|p| {
            let z = 1.0 / p.t;
            let first_order = -p.alpha;
            let second_order = p.beta * z * z;
            let lp = -z / 2.0;
            let k = (-2.0 * first_order).round().max(0.0) as usize;
            let d2 = (-second_order / (2.0 * lp * lp)).max(0.0);
            PoleEstimate { z, first_order, second_order, lambda: p.lambda, k, d: d2.sqrt() }
        })
        .collect();
    poles.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(poles)
}

/// Whether two states have the same normal parameters, comparing
/// eigenvalues relatively and displacements absolutely within `tol`.
pub fn same_distribution(a: &GaussianState, b: &GaussianState, tol: f64) -> bool {
    let pa = normal_parameters(a, CLUSTER_TOL.max(tol));
    let pb = normal_parameters(b, CLUSTER_TOL.max(tol));
    pa.approx_eq(&pb, tol, tol)
}
