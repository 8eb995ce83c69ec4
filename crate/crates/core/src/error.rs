use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature could not meet its tolerance. Carries the
    /// subinterval with the largest remaining error estimate.
    #[error("numeric failure: {reason} on [{lo}, {hi}] (error estimate {error:e})")]
    NumericFailure {
        reason: String,
        lo: f64,
        hi: f64,
        error: f64,
    },

    #[error("unsupported analytics: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, Error::NumericFailure { .. })
    }
}
