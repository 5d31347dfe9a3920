use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: must be finite and strictly positive")]
    InvalidParameter { name: &'static str, value: f64 },

    /// A denominator of the vector field (or of a back-substitution) vanished.
    #[error("singular denominator `{denominator}` at {location}")]
    Domain {
        denominator: &'static str,
        location: String,
    },

    #[error("contract violation in {operation}: {detail}")]
    ContractViolation {
        operation: &'static str,
        detail: String,
    },

    #[error("numerical failure in {operation}: {detail}")]
    NumericalFailure {
        operation: &'static str,
        detail: String,
    },

    #[error("degenerate case in {operation}: {detail}")]
    Degenerate {
        operation: &'static str,
        detail: String,
    },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn numerical(operation: &'static str, detail: impl Into<String>) -> Self {
        Error::NumericalFailure {
            operation,
            detail: detail.into(),
        }
    }

    pub(crate) fn degenerate(operation: &'static str, detail: impl Into<String>) -> Self {
        Error::Degenerate {
            operation,
            detail: detail.into(),
        }
    }
}
