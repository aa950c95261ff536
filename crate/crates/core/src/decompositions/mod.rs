//! Spectral and symplectic structure of covariance matrices.

mod counterexample;
mod euler;
mod pairing;
mod purity;
mod spectrum;
mod williamson;

pub use counterexample::{counterexample_state, counterexample_transform, Counterexample};
pub use euler::{euler_decompose, EulerDecomposition};
pub use purity::{is_pure, PurityReport};
pub use spectrum::{
    diagonal_candidate, diagonal_representative, eigencluster, normal_parameters, normal_parameters_of,
    squeezing_spectrum_pure, validate_normal_parameters, EigenCluster, NormalParameters, NormalTriple,
    ParameterReport, CLUSTER_TOL, PAIRING_TOL,
};
pub use williamson::{williamson, WilliamsonDecomposition};
