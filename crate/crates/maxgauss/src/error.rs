//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A coordinate has zero (or negative) estimated variance, which breaks
    /// studentization and correlation construction.
    #[error("degenerate variance at coordinate {index} (0-based): {message}")]
    DegenerateVariance { index: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Exit code for the CLI: 2 for statistical degeneracy, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateVariance { .. } => 2,
            _ => 1,
        }
    }
}
