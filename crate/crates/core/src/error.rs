//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by Hamiltonian construction, simulation and reconstruction.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A desk-scale resource guard was exceeded (qubit count, dictionary size).
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A text input could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Parsed data violates a structural invariant (e.g. non-Hermitian matrix).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A state does not satisfy an operation's entry condition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
