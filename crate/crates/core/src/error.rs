//! Error types shared by every solver in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical input violates a domain precondition (names the field).
    #[error("domain error: {field}: {message}")]
    Domain { field: &'static str, message: String },

    /// An inconsistent device / solver configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A linear solve or eigensolve failed.
    #[error("numeric error: {context} (residual {residual:.3e})")]
    Numeric { context: String, residual: f64 },

    /// A fixed-point iteration ran out of its iteration budget.
    #[error("convergence error: {context}; last residuals {history:?}")]
    Convergence { context: String, history: Vec<f64> },

    /// A requested feature of a trace was not present (e.g. no crossing).
    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(field: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { field, message: message.into() }
    }
}

/// Checks a strict positivity precondition, naming the offending field.
pub fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::domain(field, format!("{field} must be > 0, got {value}")));
    }
    Ok(())
}
