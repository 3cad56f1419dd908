//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by operators, solvers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix required to be Hermitian deviates beyond the tolerance.
    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// A constructor or solver argument is out of its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A NaN or infinity showed up where finite values are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A factorization or iteration broke down numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed text in a matrix/vector/config file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
