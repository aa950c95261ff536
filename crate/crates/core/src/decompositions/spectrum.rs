use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{validate_state, GaussianState, PHYSICALITY_TOL};
use crate::linalg::{cluster_sorted_desc, sym_eigen_desc, symmetrize};

/// Default relative gap below which eigenvalues are treated as degenerate.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Slack on the pairing condition `γⱼγ_{2S+1−j} ≥ 1`.
pub const PAIRING_TOL: f64 = 1e-9;

/// One eigenvalue `lambda` of the covariance matrix with multiplicity `k`
/// and the norm `d` of the displacement projected onto its eigenspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalTriple {
    pub lambda: f64,
    pub k: usize,
    pub d: f64,
}

impl NormalTriple {
    pub fn new(lambda: f64, k: usize, d: f64) -> Self {
        Self { lambda, k, d }
    }
}

/// Family of normal parameters, sorted by eigenvalue in descending order.
///
/// Any family can be represented; whether it belongs to a Gaussian state is
/// decided by [`validate_normal_parameters`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalParameters {
    modes: usize,
    triples: Vec<NormalTriple>,
}

impl NormalParameters {
    pub fn new(modes: usize, mut triples: Vec<NormalTriple>) -> Self {
        triples.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
        Self { modes, triples }
    }

    /// Infers the mode count from `Σkᵢ = 2S`.
    pub fn from_triples(triples: Vec<NormalTriple>) -> Result<Self> {
        let total: usize = triples.iter().map(|t| t.k).sum();
        if total % 2 != 0 || total == 0 {
            return Err(Error::InvalidParameters(format!("total multiplicity {total} is not a positive even number")));
        }
        Ok(Self::new(total / 2, triples))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::new(modes, vec![NormalTriple::new(1.0, 2 * modes, 0.0)])
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn triples(&self) -> &[NormalTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.triples.iter().map(|t| t.k).sum()
    }

    /// The non-ascending sequence `γ` in which each `λᵢ` appears `kᵢ` times.
    pub fn expanded_spectrum(&self) -> Vec<f64> {
        let mut gamma: Vec<f64> = self
            .triples
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.lambda, t.k))
            .collect();
        gamma.sort_by(|a, b| b.total_cmp(a));
        gamma
    }

    pub fn validate(&self) -> ParameterReport {
        validate_normal_parameters(self)
    }

    /// Same number of triples, equal multiplicities, eigenvalues within a
    /// relative tolerance and displacements within an absolute one.
    pub fn approx_eq(&self, other: &Self, lambda_rel: f64, d_abs: f64) -> bool {
        self.modes == other.modes
            && self.triples.len() == other.triples.len()
            && self.triples.iter().zip(&other.triples).all(|(a, b)| {
                a.k == b.k
                    && (a.lambda - b.lambda).abs() <= lambda_rel * a.lambda.abs().max(b.lambda.abs())
                    && (a.d - b.d).abs() <= d_abs
            })
    }
}

/// Which of the conditions characterizing normal parameters of Gaussian
/// states hold for a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterReport {
    pub valid: bool,
    pub positive_eigenvalues: bool,
    pub nonnegative_displacements: bool,
    pub positive_multiplicities: bool,
    pub distinct_eigenvalues: bool,
    pub even_dimension: bool,
    pub pairing: bool,
    pub min_pairing_product: f64,
    pub failures: Vec<String>,
}

pub fn validate_normal_parameters(params: &NormalParameters) -> ParameterReport {
    let mut failures = Vec::new();
    let triples = &params.triples;

    let positive_eigenvalues = triples.iter().all(|t| t.lambda.is_finite() && t.lambda > 0.0);
    if !positive_eigenvalues {
        failures.push("condition 0: every eigenvalue must be positive".to_string());
    }
    let nonnegative_displacements = triples.iter().all(|t| t.d.is_finite() && t.d >= 0.0);
    if !nonnegative_displacements {
        failures.push("condition 0: every displacement must be non-negative".to_string());
    }
    let positive_multiplicities = !triples.is_empty() && triples.iter().all(|t| t.k >= 1);
    if !positive_multiplicities {
        failures.push("every multiplicity must be a positive integer".to_string());
    }
    let distinct_eigenvalues = triples.windows(2).all(|w| w[0].lambda > w[1].lambda);
    if !distinct_eigenvalues {
        failures.push("eigenvalues must be distinct".to_string());
    }
    let total = params.total_multiplicity();
    let even_dimension = total % 2 == 0 && total == 2 * params.modes && params.modes > 0;
    if !even_dimension {
        failures.push(format!(
            "condition 1: total multiplicity {total} must equal 2S = {}",
            2 * params.modes
        ));
    }

    let mut min_pairing_product = f64::NAN;
    let mut pairing = false;
    if even_dimension {
        let gamma = params.expanded_spectrum();
        let n = gamma.len();
        min_pairing_product = (0..n / 2)
            .map(|j| gamma[j] * gamma[n - 1 - j])
            .fold(f64::INFINITY, f64::min);
        pairing = min_pairing_product >= 1.0 - PAIRING_TOL;
        if !pairing {
            failures.push(format!(
                "condition 2: pairing product {min_pairing_product} is below 1"
            ));
        }
    }

    ParameterReport {
        valid: failures.is_empty(),
        positive_eigenvalues,
        nonnegative_displacements,
        positive_multiplicities,
        distinct_eigenvalues,
        even_dimension,
        pairing,
        min_pairing_product,
        failures,
    }
}

/// A cluster of numerically degenerate eigenvalues with an orthonormal basis
/// (columns) of the joint eigenspace.
#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub lambda: f64,
    pub k: usize,
    pub basis: DMatrix<f64>,
}

pub fn eigencluster(cov: &DMatrix<f64>, cluster_tol: f64) -> Vec<EigenCluster> {
    let (vals, vecs) = sym_eigen_desc(&symmetrize(cov));
    let values: Vec<f64> = vals.iter().copied().collect();
    cluster_sorted_desc(&values, cluster_tol)
        .into_iter()
        .map(|range| {
            let k = range.len();
            let lambda = values[range.clone()].iter().sum::<f64>() / k as f64;
            let basis = vecs.columns(range.start, k).into_owned();
            EigenCluster { lambda, k, basis }
        })
        .collect()
}

/// Normal parameters of raw matrices, without a physicality check.
pub fn normal_parameters_of(cov: &DMatrix<f64>, disp: &DVector<f64>, cluster_tol: f64) -> NormalParameters {
    let triples = eigencluster(cov, cluster_tol)
        .into_iter()
        .map(|c| NormalTriple::new(c.lambda, c.k, (c.basis.transpose() * disp).norm()))
        .collect();
    NormalParameters::new(cov.nrows() / 2, triples)
}

pub fn normal_parameters(state: &GaussianState, cluster_tol: f64) -> NormalParameters {
    normal_parameters_of(state.cov(), state.disp(), cluster_tol)
}

/// Squeezing parameters `ln(γⱼ)/2`, `j = 1…S`, of a pure state.
pub fn squeezing_spectrum_pure(params: &NormalParameters, tol: f64) -> Result<Vec<f64>> {
    let log_det: f64 = params.triples.iter().map(|t| t.k as f64 * t.lambda.ln()).sum();
    if !(log_det.abs() <= tol) {
        return Err(Error::Domain(format!(
            "squeezing spectrum from eigenvalues requires a pure state (Πλᵢ^kᵢ = 1), got ln det = {log_det:e}"
        )));
    }
    let gamma = params.expanded_spectrum();
    Ok(gamma[..params.modes].iter().map(|g| 0.5 * g.ln()).collect())
}

/// Diagonal covariance and displacement with the given normal parameters:
/// mode `j` has diagonal `(γⱼ, γ_{2S+1−j})` and `dᵢ` sits on the first
/// coordinate carrying `λᵢ`. No validity check is performed; returns `None`
/// when the family has no well-defined expanded spectrum.
pub fn diagonal_candidate(params: &NormalParameters) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let gamma = params.expanded_spectrum();
    let n = gamma.len();
    if n == 0 || n % 2 != 0 {
        return None;
    }
    let s = n / 2;
    let mut diag = DVector::zeros(n);
    for j in 0..s {
        diag[2 * j] = gamma[j];
        diag[2 * j + 1] = gamma[n - 1 - j];
    }
    let mut disp = DVector::zeros(n);
    for t in &params.triples {
        if let Some(c) = diag.iter().position(|&g| g == t.lambda) {
            disp[c] = t.d;
        }
    }
    Some((DMatrix::from_diagonal(&diag), disp))
}

pub fn diagonal_representative(params: &NormalParameters) -> Result<GaussianState> {
    let report = validate_normal_parameters(params);
    if !report.valid {
        return Err(Error::InvalidParameters(report.failures.join("; ")));
    }
    let (cov, disp) = diagonal_candidate(params).expect("valid families have an even spectrum");
    let check = validate_state(&cov, &disp, PHYSICALITY_TOL)?;
    debug_assert!(check.physical, "valid family produced an unphysical representative");
    Ok(GaussianState::from_parts(cov, disp))
}
