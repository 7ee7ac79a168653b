//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any phaserand operation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two operators live on different bases or have different dimensions.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// An operation requiring a Hermitian matrix received one that is not.
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    /// A constrained optimization has no feasible point.
    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    /// An iterative method or grid search failed to converge.
    #[error("did not converge: {0}")]
    NoConvergence(String),

    /// A CSV input could not be parsed; `row` is 1-based and counts the
    /// header line as row 1.
    #[error("CSV parse error at row {row}: {message}")]
    CsvParse { row: usize, message: String },

    /// A config file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by parameter validation throughout the crate.
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
