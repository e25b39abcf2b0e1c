use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("estimation failed: {0}")]
    EstimationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
