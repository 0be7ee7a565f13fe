use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An experiment config setting is missing, unknown or out of range.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    /// A construction produced an object that violates its own invariants.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    /// The requested search would exceed the configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
