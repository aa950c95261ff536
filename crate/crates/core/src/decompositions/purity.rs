use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::{sym_eigen_desc, symmetrize};

/// Two independent purity witnesses: `det Γ = 1` (LU determinant) and the
/// tight pairing `γⱼγ_{2S+1−j} = 1` of the sorted spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityReport {
    pub pure: bool,
    pub determinant: f64,
    pub det_pure: bool,
    pub max_pairing_deviation: f64,
    pub pairing_pure: bool,
    pub witnesses_agree: bool,
}

pub fn is_pure(cov: &DMatrix<f64>, tol: f64) -> PurityReport {
    let cov = symmetrize(cov);
    let determinant = cov.clone().lu().determinant();
    let det_pure = (determinant - 1.0).abs() <= tol;

    let (gamma, _) = sym_eigen_desc(&cov);
    let n = gamma.len();
    let max_pairing_deviation = (0..n / 2)
        .map(|j| (gamma[j] * gamma[n - 1 - j] - 1.0).abs())
        .fold(0.0, f64::max);
    let pairing_pure = max_pairing_deviation <= tol;

    PurityReport {
        pure: det_pure,
        determinant,
        det_pure,
        max_pairing_deviation,
        pairing_pure,
        witnesses_agree: det_pure == pairing_pure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_orthosymplectic;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_and_thermal() {
        let r = is_pure(&DMatrix::identity(2, 2), 1e-10);
        assert!(r.pure && r.witnesses_agree);
        let r = is_pure(&(DMatrix::identity(2, 2) * 3.0), 1e-10);
        assert!(!r.pure && r.witnesses_agree);
        assert!((r.determinant - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_squeezed_vacuum_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l = random_orthosymplectic(2, &mut rng);
        let q2 = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0 / 3.0, 1.5, 1.0 / 1.5]));
        let r = is_pure(&(l.transpose() * q2 * &l), 1e-10);
        assert!(r.pure && r.pairing_pure && r.witnesses_agree);
    }
}
