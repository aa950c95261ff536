use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("covariance matrix is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("unphysical parameter: {0}")]
    Unphysical(String),

    #[error("matrix is not symplectic: ||A^T J A - J|| = {0:e}")]
    NotSymplectic(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("truncation error: {message} (achieved tail {achieved:e})")]
    Truncation { message: String, achieved: f64 },

    #[error("ill-conditioned Padé system: {0}")]
    Conditioning(String),

    #[error("invalid normal parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}
