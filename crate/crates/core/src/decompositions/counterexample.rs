use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// A two-mode covariance that no orthogonal symplectic matrix diagonalizes,
/// together with the quantities that witness it.
#[derive(Clone, Debug)]
pub struct Counterexample {
    /// `Γ = RᵀΔR`, undisplaced.
    pub state: GaussianState,
    pub g_plus: f64,
    pub g_minus: f64,
    /// Temperature parameters `(1 + 2τ, 1)`.
    pub temperatures: [f64; 2],
    /// Common squeezing parameter `½ ln((c+s)/(c−s))` of both modes.
    pub squeezing: f64,
    /// Spectrum a diagonalizable matrix with these temperatures and
    /// squeezings would have.
    pub os_diagonal_spectrum: [f64; 4],
}

impl Counterexample {
    /// Number of distinct values in the predicted spectrum.
    pub fn os_diagonal_distinct(&self, rel_tol: f64) -> usize {
        let mut v = self.os_diagonal_spectrum.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        1 + v.windows(2).filter(|w| w[0] - w[1] > rel_tol * w[0]).count()
    }
}

/// The symmetric two-mode symplectic matrix with `c` on the diagonal and
/// `±s` coupling the modes.
pub fn counterexample_transform(c: f64, s: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    )
}

pub fn counterexample_state(tau: f64, c: f64, s: f64) -> Result<Counterexample> {
    if !(tau >= 0.0) || !(s >= 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!("need τ ≥ 0, c > 0, s ≥ 0, got τ={tau}, c={c}, s={s}")));
    }
    if ((c * c - s * s) - 1.0).abs() > 1e-12 * (c * c).max(1.0) {
        return Err(Error::Domain(format!("c² − s² = {} must equal 1", c * c - s * s)));
    }
    let r = counterexample_transform(c, s);
    let t = 1.0 + 2.0 * tau;
    let delta = DMatrix::from_diagonal(&DVector::from_vec(vec![t, t, 1.0, 1.0]));
    let cov = r.transpose() * delta * &r;

    let a = (1.0 + tau) * (c * c + s * s);
    let b = (4.0 * (1.0 + tau).powi(2) * c * c * s * s + tau * tau).sqrt();
    let ratio = (c + s) / (c - s);
    Ok(Counterexample {
        state: GaussianState::from_parts(cov, DVector::zeros(4)),
        g_plus: a + b,
        g_minus: a - b,
        temperatures: [t, 1.0],
        squeezing: 0.5 * ratio.ln(),
        os_diagonal_spectrum: [t * ratio, t / ratio, ratio, 1.0 / ratio],
    })
}
