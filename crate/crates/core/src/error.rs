use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("invalid {param}: {reason}")]
    Domain { param: String, reason: String },

    /// Caller broke a structural precondition (mismatched lengths, non-Hermitian input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{what} of size {size} exceeds the limit {limit}")]
    Size { what: &'static str, size: usize, limit: usize },

    #[error(
        "{what} did not converge: error estimate {error_estimate:.3e} above tolerance {tolerance:.3e} after {evaluations} evaluations"
    )]
    Convergence {
        what: &'static str,
        error_estimate: f64,
        tolerance: f64,
        evaluations: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain { param: param.into(), reason: reason.into() }
    }
}
