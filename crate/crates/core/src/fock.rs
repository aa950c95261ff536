//! Brute-force photon statistics of single-mode squeezed, displaced, thermal
//! states in a truncated Fock basis, combined across independent modes by
//! convolution. Used to cross-check the generating-function route.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::expm;
use crate::photon::PhotonDistribution;

pub const DEFAULT_DIM: usize = 80;
pub const MAX_DIM: usize = 640;
pub const LEAKAGE_TARGET: f64 = 1e-8;

/// Fock cutoff used for one mode and the probability mass it failed to
/// capture in the reported (inner half) block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockTruncation {
    pub dim: usize,
    pub leakage: f64,
}

/// `ρ = D(α) S(r) ρ_th(ν) S(r)† D(α)†`, with `α = (d_q + i d_p)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleMode {
    pub nu: f64,
    pub r: f64,
    #[serde(with = "complex_pair", default)]
    pub alpha: Complex64,
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl OracleMode {
    pub fn new(nu: f64, r: f64, alpha: Complex64) -> Self {
        Self { nu, r, alpha }
    }
}

/// Lowering operator truncated to `dim` levels.
pub fn lowering(dim: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// `exp((r/2)(a² − a†²))`; for `r > 0` it squeezes the `q` quadrature.
pub fn squeeze_operator(r: f64, dim: usize) -> DMatrix<f64> {
    let a = lowering(dim);
    let a2 = &a * &a;
    expm(&((&a2 - a2.transpose()) * (r / 2.0)))
}

/// `exp(α a† − ᾱ a)`.
pub fn displacement_operator(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = lowering(dim).map(|x| Complex64::new(x, 0.0));
    let ad = a.transpose();
    expm(&(ad * alpha - a * alpha.conj()))
}

/// Real displacement `exp(x (a† − a))`.
fn real_displacement(x: f64, dim: usize) -> DMatrix<f64> {
    let a = lowering(dim);
    expm(&((a.transpose() - a) * x))
}

/// Photon-number probabilities `p₀ … p_{D/2−1}` of one mode.
pub fn single_mode_probs(mode: &OracleMode, dim: usize) -> Result<(Vec<f64>, FockTruncation)> {
    if dim < 2 {
        return Err(Error::Domain(format!("Fock cutoff must be at least 2, got {dim}")));
    }
    if !(mode.nu >= 1.0) || !mode.r.is_finite() || !mode.alpha.re.is_finite() || !mode.alpha.im.is_finite() {
        return Err(Error::Domain(format!("invalid mode {mode:?}")));
    }
    let x = (mode.nu - 1.0) / (mode.nu + 1.0);
    let thermal: Vec<f64> = (0..dim).map(|m| (1.0 - x) * x.powi(m as i32)).collect();

    // U_{nm} weights |U_{nm}|²; a phase rotation e^{iφn̂} leaves them unchanged
    // and turns α into iα and r into −r, so a displacement along one axis can
    // always be made real.
    let weights: DMatrix<f64> = if mode.alpha.im == 0.0 || mode.alpha.re == 0.0 {
        let (x, r) = if mode.alpha.im == 0.0 { (mode.alpha.re, mode.r) } else { (mode.alpha.im, -mode.r) };
        let u = real_displacement(x, dim) * squeeze_operator(r, dim);
        u.map(|v| v * v)
    } else {
        let s = squeeze_operator(mode.r, dim).map(|v| Complex64::new(v, 0.0));
        let u = displacement_operator(mode.alpha, dim) * s;
        u.map(|v| v.norm_sqr())
    };
    let inner = dim / 2;
    let probs = weights.rows(0, inner) * DVector::from_vec(thermal);
    let probs: Vec<f64> = probs.iter().copied().collect();
    let leakage = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let trunc = FockTruncation { dim, leakage };
    if leakage > LEAKAGE_TARGET {
        return Err(Error::Truncation {
            message: format!("Fock cutoff {dim} leaks {leakage:e}; use a larger cutoff"),
            achieved: leakage,
        });
    }
    Ok((probs, trunc))
}

/// Like [`single_mode_probs`], doubling the cutoff from `DEFAULT_DIM` up to
/// `MAX_DIM` until the leakage target is met.
pub fn single_mode_probs_auto(mode: &OracleMode) -> Result<(Vec<f64>, FockTruncation)> {
    let mut dim = DEFAULT_DIM;
    loop {
        match single_mode_probs(mode, dim) {
            Err(Error::Truncation { .. }) if dim < MAX_DIM => dim = (2 * dim).min(MAX_DIM),
            other => return other,
        }
    }
}

/// Distribution of the sum of two independent counts.
pub fn convolve(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Total photon-number distribution of a product of single-mode states.
/// With `dim = None` each mode picks its own cutoff automatically.
pub fn oracle_distribution(modes: &[OracleMode], dim: Option<usize>) -> Result<PhotonDistribution> {
    let mut total = vec![1.0];
    for mode in modes {
        let (p, _) = match dim {
            Some(d) => single_mode_probs(mode, d)?,
            None => single_mode_probs_auto(mode)?,
        };
        total = convolve(&total, &p);
    }
    let leak = (1.0 - total.iter().sum::<f64>()).max(0.0);
    Ok(PhotonDistribution::from_parts(total, leak))
}

/// Reads off the single-mode parameters of a state with diagonal covariance:
/// mode `j` has `Γ = diag(ν e^{−2r}, ν e^{2r})`.
pub fn modes_from_diagonal(state: &GaussianState) -> Result<Vec<OracleMode>> {
    let cov = state.cov();
    let n = cov.nrows();
    let scale = cov.norm();
    for i in 0..n {
        for j in 0..n {
            if i != j && cov[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::Domain("the oracle needs a diagonal covariance matrix".into()));
            }
        }
    }
    let d = state.disp();
    Ok((0..state.modes())
        .map(|j| {
            let (gq, gp) = (cov[(2 * j, 2 * j)], cov[(2 * j + 1, 2 * j + 1)]);
            let nu = (gq * gp).sqrt().max(1.0);
            let r = 0.25 * (gp / gq).ln();
            let alpha = Complex64::new(d[2 * j], d[2 * j + 1]) / std::f64::consts::SQRT_2;
            OracleMode::new(nu, r, alpha)
        })
        .collect())
}
