//! Seeded generators of random symplectic matrices, states and normal
//! parameter families, used by the property and acceptance suites.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::decompositions::{NormalParameters, NormalTriple};
use crate::gaussian::{symplectic_form, GaussianState};
use crate::linalg::{expm, symmetrize};

fn uniform_matrix<R: Rng>(n: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| scale * rng.random_range(-1.0..1.0))
}

/// Random passive (orthogonal and symplectic) transformation `exp(X)` with
/// `X` antisymmetric and commuting with `J`.
pub fn random_orthosymplectic<R: Rng>(modes: usize, rng: &mut R) -> DMatrix<f64> {
    let j = symplectic_form(modes).into_matrix();
    let a = uniform_matrix(2 * modes, std::f64::consts::PI, rng);
    let a = (&a - a.transpose()) * 0.5;
    let x = (&a + &j * &a * j.transpose()) * 0.5;
    expm(&x)
}

/// Random symplectic matrix `exp(J H)` with `H` symmetric, entries of order
/// `scale`.
pub fn random_symplectic<R: Rng>(modes: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let j = symplectic_form(modes).into_matrix();
    let h = symmetrize(&uniform_matrix(2 * modes, scale, rng));
    expm(&(j * h))
}

/// Random physical state `Γ = AᵀTA`; returns the state and its symplectic
/// spectrum. About a fifth of the modes are left at `ν = 1`.
pub fn random_physical_state<R: Rng>(
    modes: usize,
    nu_max: f64,
    squeeze_scale: f64,
    rng: &mut R,
) -> (GaussianState, Vec<f64>) {
    let nu: Vec<f64> = (0..modes)
        .map(|_| if rng.random_bool(0.2) { 1.0 } else { rng.random_range(1.0..nu_max) })
        .collect();
    let t = DMatrix::from_diagonal(&DVector::from_iterator(2 * modes, nu.iter().flat_map(|&v| [v, v])));
    let a = random_symplectic(modes, squeeze_scale, rng) * random_orthosymplectic(modes, rng);
    let cov = symmetrize(&(a.transpose() * t * &a));
    let disp = DVector::from_fn(2 * modes, |_, _| rng.random_range(-2.0..2.0));
    (GaussianState::from_parts(cov, disp), nu)
}

/// Sampler of valid normal-parameter families built from products of
/// squeezed thermal modes, so every family is realizable by construction.
#[derive(Clone, Debug)]
pub struct ParamSampler {
    pub max_modes: usize,
    /// Eigenvalues lie in `[e^{−L}, e^{L}]`.
    pub log_lambda_max: f64,
    pub max_disp: f64,
    /// Minimum `|ln λᵢ − ln λⱼ|` between distinct eigenvalues.
    pub min_log_gap: f64,
    pub zero_disp_prob: f64,
}

impl Default for ParamSampler {
    fn default() -> Self {
        Self {
            max_modes: 3,
            log_lambda_max: 3.0,
            max_disp: 2.0,
            min_log_gap: 0.0,
            zero_disp_prob: 0.3,
        }
    }
}

impl ParamSampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> NormalParameters {
        let l = self.log_lambda_max;
        loop {
            let modes = rng.random_range(1..=self.max_modes);
            let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(modes);
            for _ in 0..modes {
                if !pairs.is_empty() && rng.random_bool(0.15) {
                    let p = pairs[rng.random_range(0..pairs.len())];
                    pairs.push(p);
                    continue;
                }
                let log_nu = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..0.6 * l) };
                let r = if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(0.0..(l - log_nu) / 2.0)
                };
                pairs.push((log_nu.exp(), r));
            }
            let mut spectrum: Vec<f64> = pairs
                .iter()
                .flat_map(|&(nu, r)| [nu * (2.0 * r).exp(), nu * (-2.0 * r).exp()])
                .collect();
            spectrum.sort_by(|a, b| b.total_cmp(a));
            let mut triples: Vec<NormalTriple> = Vec::new();
            for g in spectrum {
                match triples.last_mut() {
                    Some(t) if (t.lambda - g).abs() <= 1e-12 * g => t.k += 1,
                    _ => triples.push(NormalTriple::new(g, 1, 0.0)),
                }
            }
            let separated = triples
                .windows(2)
                .all(|w| (w[0].lambda / w[1].lambda).ln() >= self.min_log_gap);
            if !separated {
                continue;
            }
            for t in &mut triples {
                if !rng.random_bool(self.zero_disp_prob) {
                    t.d = rng.random_range(0.0..self.max_disp);
                }
            }
            return NormalParameters::new(modes, triples);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symplectic_residual;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthosymplectic_is_both() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in 1..4 {
            let o = random_orthosymplectic(s, &mut rng);
            assert!((o.transpose() * &o - DMatrix::identity(2 * s, 2 * s)).norm() < 1e-12);
            assert!(symplectic_residual(&o) < 1e-12);
        }
    }

    #[test]
    fn sampled_families_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sampler = ParamSampler { min_log_gap: 0.2, ..Default::default() };
        for _ in 0..200 {
            let p = sampler.sample(&mut rng);
            assert!(p.validate().valid, "{p:?}");
            assert!(p.triples().iter().all(|t| t.lambda.ln().abs() <= 3.0 + 1e-12));
        }
    }
}
