//! Gaussian states in the quadrature picture.
//!
//! Quadratures are ordered `(q₁, p₁, …, q_S, p_S)` everywhere. The covariance
//! matrix is `Γᵢⱼ = ⟨r̂ᵢr̂ⱼ + r̂ⱼr̂ᵢ⟩ − 2⟨r̂ᵢ⟩⟨r̂ⱼ⟩`, so the vacuum has `Γ = I`
//! and a thermal mode with mean occupation `n̄` has `Γ = (2n̄ + 1) I`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{relative_asymmetry, sym_eigen_desc, sym_fn, symmetrize};

/// Largest relative asymmetry `‖Γ − Γᵀ‖/‖Γ‖` that is silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default slack on `νᵢ ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// The standard symplectic form: block diagonal with blocks `((0, 1), (−1, 0))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub fn symplectic_form(modes: usize) -> SymplecticForm {
    let mut matrix = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        matrix[(2 * i, 2 * i + 1)] = 1.0;
        matrix[(2 * i + 1, 2 * i)] = -1.0;
    }
    SymplecticForm { modes, matrix }
}

/// `‖AᵀJA − J‖_F`.
pub fn symplectic_residual(a: &DMatrix<f64>) -> f64 {
    let j = symplectic_form(a.nrows() / 2).into_matrix();
    (a.transpose() * &j * a - j).norm()
}

/// Whether `A` is symplectic, with the residual measured relative to `‖A‖²`.
pub fn is_symplectic(a: &DMatrix<f64>, tol: f64) -> bool {
    a.is_square()
        && a.nrows() % 2 == 0
        && symplectic_residual(a) <= tol * a.norm_squared().max(1.0)
}

/// Symplectic eigenvalues of a positive definite matrix, non-ascending.
///
/// With `K = Γ^{1/2} J Γ^{1/2}` antisymmetric, `KᵀK` has each `νᵢ²` as a
/// doubly degenerate eigenvalue.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let modes = cov.nrows() / 2;
    let root = sym_fn(cov, |x| x.max(0.0).sqrt());
    let j = symplectic_form(modes).into_matrix();
    let k = &root * j * &root;
    let (vals, _) = sym_eigen_desc(&(k.transpose() * &k));
    (0..modes)
        .map(|i| (0.5 * (vals[2 * i] + vals[2 * i + 1])).max(0.0).sqrt())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub positive: bool,
    pub physical: bool,
    pub min_symplectic_eigenvalue: f64,
    pub messages: Vec<String>,
}

/// Checks symmetry, positivity and the uncertainty principle `νᵢ ≥ 1 − tol`.
pub fn validate_state(cov: &DMatrix<f64>, disp: &DVector<f64>, tol: f64) -> Result<ValidationReport> {
    check_shapes(cov, disp)?;
    let mut messages = Vec::new();
    let asym = relative_asymmetry(cov);
    let symmetric = asym <= SYMMETRY_TOL;
    if !symmetric {
        messages.push(format!("covariance asymmetry {asym:e} exceeds {SYMMETRY_TOL:e}"));
    }
    let sym = symmetrize(cov);
    let (vals, _) = sym_eigen_desc(&sym);
    let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let positive = cov.iter().all(|x| x.is_finite()) && min_eig > 0.0;
    if !positive {
        messages.push(format!("covariance is not positive definite (min eigenvalue {min_eig:e})"));
    }
    let min_nu = if positive {
        symplectic_eigenvalues(&sym).into_iter().fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    let physical = symmetric && positive && min_nu >= 1.0 - tol;
    if positive && !physical && min_nu < 1.0 - tol {
        messages.push(format!("uncertainty principle violated: min symplectic eigenvalue {min_nu}"));
    }
    Ok(ValidationReport {
        symmetric,
        positive,
        physical,
        min_symplectic_eigenvalue: min_nu,
        messages,
    })
}

fn check_shapes(cov: &DMatrix<f64>, disp: &DVector<f64>) -> Result<()> {
    if !cov.is_square() || cov.nrows() % 2 != 0 || cov.nrows() == 0 {
        return Err(Error::Shape(format!(
            "covariance must be square with positive even dimension, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if disp.len() != cov.nrows() {
        return Err(Error::Shape(format!(
            "displacement has length {}, expected {}",
            disp.len(),
            cov.nrows()
        )));
    }
    Ok(())
}

/// A physical Gaussian state. Immutable; transformations return new states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct GaussianState {
    modes: usize,
    cov: DMatrix<f64>,
    disp: DVector<f64>,
}

impl GaussianState {
    /// Builds a state, symmetrizing round-off asymmetry and rejecting
    /// unphysical covariances.
    pub fn new(cov: DMatrix<f64>, disp: DVector<f64>) -> Result<Self> {
        let report = validate_state(&cov, &disp, PHYSICALITY_TOL)?;
        if !report.symmetric {
            return Err(Error::Asymmetric(relative_asymmetry(&cov)));
        }
        if !report.physical {
            return Err(Error::Unphysical(report.messages.join("; ")));
        }
        Ok(Self::from_parts(symmetrize(&cov), disp))
    }

    pub(crate) fn from_parts(cov: DMatrix<f64>, disp: DVector<f64>) -> Self {
        Self {
            modes: cov.nrows() / 2,
            cov,
            disp,
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::from_parts(DMatrix::identity(2 * modes, 2 * modes), DVector::zeros(2 * modes))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn disp(&self) -> &DVector<f64> {
        &self.disp
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_state(&self.cov, &self.disp, tol).expect("state shapes are consistent")
    }

    /// Transforms second moments and means under the linear map of
    /// quadratures `A`: `Γ → AᵀΓA`, `d → Aᵀd`.
    pub fn apply_symplectic(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.cov.nrows() || a.ncols() != self.cov.ncols() {
            return Err(Error::Shape(format!(
                "transformation is {}x{}, state has dimension {}",
                a.nrows(),
                a.ncols(),
                self.cov.nrows()
            )));
        }
        let residual = symplectic_residual(a);
        if residual > 1e-9 * a.norm_squared().max(1.0) {
            return Err(Error::NotSymplectic(residual));
        }
        let cov = symmetrize(&(a.transpose() * &self.cov * a));
        let disp = a.transpose() * &self.disp;
        Ok(Self::from_parts(cov, disp))
    }

    pub fn with_displacement(&self, disp: DVector<f64>) -> Result<Self> {
        check_shapes(&self.cov, &disp)?;
        Ok(Self::from_parts(self.cov.clone(), disp))
    }
}

/// Product of squeezed thermal modes: mode `i` has covariance block
/// `diag(νᵢe^{2rᵢ}, νᵢe^{−2rᵢ})`.
pub fn make_squeezed_thermal(nu: &[f64], r: &[f64], disp: DVector<f64>) -> Result<GaussianState> {
    if nu.len() != r.len() || nu.is_empty() {
        return Err(Error::Shape(format!(
            "need equally many temperatures and squeezings, got {} and {}",
            nu.len(),
            r.len()
        )));
    }
    if let Some((i, &v)) = nu.iter().enumerate().find(|(_, &v)| !(v >= 1.0)) {
        return Err(Error::Unphysical(format!("temperature parameter ν[{i}] = {v} < 1")));
    }
    let modes = nu.len();
    let mut diag = DVector::zeros(2 * modes);
    for i in 0..modes {
        diag[2 * i] = nu[i] * (2.0 * r[i]).exp();
        diag[2 * i + 1] = nu[i] * (-2.0 * r[i]).exp();
    }
    let cov = DMatrix::from_diagonal(&diag);
    check_shapes(&cov, &disp)?;
    Ok(GaussianState::from_parts(cov, disp))
}

/// Wire format `{"modes": S, "cov": [[…]], "disp": […]}`, covariance row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub modes: usize,
    pub cov: Vec<Vec<f64>>,
    pub disp: Vec<f64>,
}

impl StateJson {
    /// Parses the matrices without any physicality check.
    pub fn to_matrices(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let dim = 2 * self.modes;
        if self.cov.len() != dim || self.cov.iter().any(|row| row.len() != dim) {
            return Err(Error::Shape(format!("\"cov\" must be {dim}x{dim} for {} modes", self.modes)));
        }
        if self.disp.len() != dim {
            return Err(Error::Shape(format!("\"disp\" must have length {dim}")));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| self.cov[i][j]);
        Ok((cov, DVector::from_vec(self.disp.clone())))
    }
}

impl TryFrom<StateJson> for GaussianState {
    type Error = Error;

    fn try_from(value: StateJson) -> Result<Self> {
        let (cov, disp) = value.to_matrices()?;
        GaussianState::new(cov, disp)
    }
}

impl From<GaussianState> for StateJson {
    fn from(state: GaussianState) -> Self {
        let dim = state.cov.nrows();
        StateJson {
            modes: state.modes,
            cov: (0..dim).map(|i| (0..dim).map(|j| state.cov[(i, j)]).collect()).collect(),
            disp: state.disp.iter().copied().collect(),
        }
    }
}
