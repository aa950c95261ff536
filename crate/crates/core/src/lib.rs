//! Total photon-number statistics of multimode Gaussian states.
//!
//! A Gaussian state on `S` modes is described by a `2S × 2S` covariance
//! matrix (vacuum = identity, quadrature ordering `q₁, p₁, …, q_S, p_S`) and a
//! displacement vector. A detector that counts the total number of photons
//! without resolving modes only sees the *normal parameters* of the state:
//! the distinct covariance eigenvalues, their multiplicities and the norm of
//! the displacement inside each eigenspace.
//!
//! The crate provides
//!
//! - [`gaussian`]: states, the symplectic form, validation and symplectic
//!   transformations;
//! - [`decompositions`]: eigenvalue clustering, normal parameters, Williamson
//!   and Euler (Bloch–Messiah) decompositions, purity, squeezing spectra,
//!   validity of parameter families and diagonal representatives;
//! - [`series`]: truncated power series arithmetic;
//! - [`photon`]: the forward map from normal parameters to photon-number
//!   probabilities and moments, plus sampling;
//! - [`inverse`]: recovery of normal parameters from a distribution;
//! - [`fock`]: a brute-force truncated Fock-space oracle used for
//!   cross-checking;
//! - [`cli`]: the `gaussian-pnr` command line driver.

pub mod cli;
pub mod decompositions;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod inverse;
pub mod linalg;
pub mod lm;
pub mod photon;
pub mod random;
pub mod series;

pub use decompositions::{NormalParameters, NormalTriple};
pub use error::{Error, Result};
pub use gaussian::GaussianState;
pub use photon::PhotonDistribution;
pub use series::TruncatedSeries;
