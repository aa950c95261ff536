use nalgebra::{DMatrix, DVector};

use super::pairing::paired_basis;
use crate::error::{Error, Result};
use crate::gaussian::{symplectic_form, symplectic_residual};
use crate::linalg::{cluster_sorted_desc, sym_eigen_desc, symmetrize};

/// `A = K Q L` with `K`, `L` orthogonal symplectic and `Q` a product of
/// single-mode squeezers `diag(e^{rᵢ}, e^{−rᵢ})`.
///
/// `K` and `L` are not unique; only the reconstruction and `r` are meaningful.
#[derive(Clone, Debug)]
pub struct EulerDecomposition {
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    /// Squeezing parameters, non-negative and non-ascending.
    pub r: Vec<f64>,
}

impl EulerDecomposition {
    pub fn squeezer(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            2 * self.r.len(),
            self.r.iter().flat_map(|&r| [r.exp(), (-r).exp()]),
        ))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.k * self.squeezer() * &self.l
    }
}

/// Polar decomposition `A = W P`, followed by a symplectic eigenbasis of the
/// positive symplectic factor `P = Lᵀ Q L`.
///
/// For an eigenvector `v` of `P` with eigenvalue `e^{r}`, `Jᵀv` is an
/// eigenvector with eigenvalue `e^{−r}`; the columns of `Lᵀ` are the pairs
/// `(v, Jᵀv)`.
pub fn euler_decompose(a: &DMatrix<f64>) -> Result<EulerDecomposition> {
    if !a.is_square() || a.nrows() % 2 != 0 || a.nrows() == 0 {
        return Err(Error::Shape(format!("expected a square matrix of even dimension, got {}x{}", a.nrows(), a.ncols())));
    }
    let residual = symplectic_residual(a);
    if residual > 1e-9 * a.norm_squared().max(1.0) {
        return Err(Error::NotSymplectic(residual));
    }
    let modes = a.nrows() / 2;
    let (sq, u) = sym_eigen_desc(&symmetrize(&(a.transpose() * a)));
    let sigma: Vec<f64> = sq.iter().map(|x| x.max(0.0).sqrt()).collect();
    let scale = |f: &dyn Fn(f64) -> f64| {
        let d = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * f(sigma[j]));
        &d * u.transpose()
    };
    let p = scale(&|x| x);
    let w = a * scale(&|x| 1.0 / x);

    let jt = symplectic_form(modes).into_matrix().transpose();
    let clusters = cluster_sorted_desc(sq.as_slice(), 1e-6);
    let basis = paired_basis(&u, &clusters, |v| &jt * v, modes);

    let mut pairs: Vec<(f64, DVector<f64>, DVector<f64>)> = (0..modes)
        .map(|i| {
            let v = basis.column(2 * i).into_owned();
            let w = basis.column(2 * i + 1).into_owned();
            let r = v.dot(&(&p * &v)).ln();
            if r < 0.0 {
                // (v, Jᵀv) → (Jᵀv, −v) swaps the roles of the two quadratures
                (-r, w, -v)
            } else {
                (r, v, w)
            }
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut lt = DMatrix::zeros(2 * modes, 2 * modes);
    for (i, (_, v, w)) in pairs.iter().enumerate() {
        lt.set_column(2 * i, v);
        lt.set_column(2 * i + 1, w);
    }
    Ok(EulerDecomposition {
        k: w * &lt,
        l: lt.transpose(),
        r: pairs.into_iter().map(|p| p.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::counterexample_transform;
    use crate::random::{random_orthosymplectic, random_symplectic};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(a: &DMatrix<f64>) -> EulerDecomposition {
        let e = euler_decompose(a).unwrap();
        let n = a.nrows();
        let rel = (e.reconstruct() - a).norm() / a.norm();
        assert!(rel <= 1e-8, "reconstruction {rel:e}");
        for m in [&e.k, &e.l] {
            assert!((m.transpose() * m - DMatrix::identity(n, n)).norm() < 1e-9);
            assert!(symplectic_residual(m) < 1e-9);
        }
        assert!(e.r.iter().all(|&r| r >= 0.0));
        assert!(e.r.windows(2).all(|p| p[0] >= p[1]));
        e
    }

    #[test]
    fn identity_has_no_squeezing() {
        let e = check(&DMatrix::identity(4, 4));
        assert!(e.r.iter().all(|&r| r.abs() < 1e-12));
    }

    #[test]
    fn single_squeezer() {
        let r = 0.9_f64;
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()]));
        let e = check(&a);
        assert!((e.r[0] - r).abs() < 1e-12);
        // anti-squeezed along p
        let e = check(&DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()])));
        assert!((e.r[0] - r).abs() < 1e-12);
    }

    #[test]
    fn counterexample_transform_squeezing() {
        let (c, s) = (1f64.cosh(), 1f64.sinh());
        let e = check(&counterexample_transform(c, s));
        let expected = 0.5 * ((c + s) / (c - s)).ln();
        assert!((e.r[0] - expected).abs() < 1e-10 && (e.r[1] - expected).abs() < 1e-10);
    }

    #[test]
    fn random_symplectic_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in 1..=4 {
            for _ in 0..25 {
                check(&random_symplectic(s, 0.7, &mut rng));
            }
        }
    }

    #[test]
    fn degenerate_squeezing() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (k, l) = (random_orthosymplectic(3, &mut rng), random_orthosymplectic(3, &mut rng));
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5, 2.0, 0.5, 1.0, 1.0]));
        let e = check(&(k * q * l));
        assert!((e.r[0] - 2f64.ln()).abs() < 1e-10 && (e.r[1] - 2f64.ln()).abs() < 1e-10 && e.r[2].abs() < 1e-10);
    }

    #[test]
    fn rejects_non_symplectic() {
        assert!(matches!(euler_decompose(&(DMatrix::identity(2, 2) * 2.0)), Err(Error::NotSymplectic(_))));
    }
}
