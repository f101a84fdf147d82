use std::io;

use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value cannot be represented, or an intermediate left the binary32 range.
    #[error("value out of range: {0}")]
    Range(String),

    #[error("division by zero")]
    DivideByZero,

    /// An input lies outside the domain of the operation (NaN, infinity).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested output would be impractically large.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    Validation(String),

    /// A malformed record. `line` is 1-based; 0 means the container itself.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally valid input that does not match the expected layout.
    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
