use nalgebra::{DMatrix, DVector};

use super::pairing::paired_basis;
use crate::error::{Error, Result};
use crate::gaussian::symplectic_form;
use crate::linalg::{cluster_sorted_desc, sym_eigen_desc, symmetrize};

/// `Γ = AᵀTA` with `A` symplectic and `T = diag(ν₁, ν₁, …, ν_S, ν_S)`.
#[derive(Clone, Debug)]
pub struct WilliamsonDecomposition {
    pub symplectic: DMatrix<f64>,
    /// Symplectic spectrum, non-ascending.
    pub nu: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn thermal_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            2 * self.nu.len(),
            self.nu.iter().flat_map(|&v| [v, v]),
        ))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.symplectic.transpose() * self.thermal_matrix() * &self.symplectic
    }
}

/// Symplectic diagonalization through the real Schur form of the
/// antisymmetric matrix `K = Γ^{-1/2} J Γ^{-1/2}`.
///
/// If `OᵀKO` is block diagonal with blocks `((0, ωᵢ), (−ωᵢ, 0))` then
/// `νᵢ = 1/ωᵢ` and `A = T^{-1/2} Oᵀ Γ^{1/2}`.
pub fn williamson(cov: &DMatrix<f64>) -> Result<WilliamsonDecomposition> {
    if !cov.is_square() || cov.nrows() % 2 != 0 || cov.nrows() == 0 {
        return Err(Error::Shape(format!("expected a square matrix of even dimension, got {}x{}", cov.nrows(), cov.ncols())));
    }
    let modes = cov.nrows() / 2;
    let cov = symmetrize(cov);
    let (vals, vecs) = sym_eigen_desc(&cov);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Domain(format!("covariance is not positive definite (min eigenvalue {min:e})")));
    }
    let scaled = |f: fn(f64) -> f64| {
        let d = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * f(vals[j]));
        &d * vecs.transpose()
    };
    let root = scaled(f64::sqrt);
    let inv_root = scaled(|x| 1.0 / x.sqrt());

    let j = symplectic_form(modes).into_matrix();
    let k = &inv_root * j * &inv_root;
    let k = (&k - k.transpose()) * 0.5;

    // ascending ω² ⇔ descending ν
    let (neg_mu, basis) = sym_eigen_desc(&-(k.transpose() * &k));
    let clusters = cluster_sorted_desc(neg_mu.as_slice(), 1e-6);
    let o = paired_basis(
        &basis,
        &clusters,
        |v| {
            let kv = -(&k * v);
            let n = kv.norm();
            kv / n
        },
        modes,
    );

    let mut blocks: Vec<(f64, usize)> = (0..modes)
        .map(|i| {
            let omega = o.column(2 * i).dot(&(&k * o.column(2 * i + 1)));
            (1.0 / omega, i)
        })
        .collect();
    blocks.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut ordered = DMatrix::zeros(2 * modes, 2 * modes);
    let mut inv_sqrt_t = DVector::zeros(2 * modes);
    for (dst, &(nu, src)) in blocks.iter().enumerate() {
        ordered.set_column(2 * dst, &o.column(2 * src));
        ordered.set_column(2 * dst + 1, &o.column(2 * src + 1));
        inv_sqrt_t[2 * dst] = 1.0 / nu.sqrt();
        inv_sqrt_t[2 * dst + 1] = 1.0 / nu.sqrt();
    }
    let symplectic = DMatrix::from_diagonal(&inv_sqrt_t) * ordered.transpose() * root;
    Ok(WilliamsonDecomposition {
        symplectic,
        nu: blocks.into_iter().map(|b| b.0).collect(),
    })
}
