//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, model, data generation and training code.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed something with the wrong shape, range or configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation produced or received a non-finite number.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The requested operation is not defined for the given configuration
    /// (e.g. analytic gradients of a noisy circuit).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
