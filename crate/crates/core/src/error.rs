use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("degenerate recurrence at t = {t}: {reason}")]
    DegenerateRecurrence { t: usize, reason: String },

    #[error("quadrature did not reach tolerance: estimated error {estimate:e} > {tolerance:e}")]
    QuadratureAccuracy { estimate: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive semidefinite: {0}")]
    NotPsd(String),

    #[error("dense eigendecomposition cap exceeded: d = {d} > {cap}")]
    DenseCapExceeded { d: usize, cap: usize },

    #[error("spectrum cannot be fitted: {0}")]
    FitFailed(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
