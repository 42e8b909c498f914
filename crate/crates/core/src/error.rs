//! Error type shared by all simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },

    #[error("unsupported size: {reason}")]
    UnsupportedSize { reason: String },

    #[error("degenerate input: {reason}")]
    DegenerateInput { reason: String },
}

impl Error {
    pub fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidArgument { reason: reason.into() }
    }

    pub fn unsupported(reason: impl Into<String>) -> Self {
        Error::UnsupportedSize { reason: reason.into() }
    }

    pub fn degenerate(reason: impl Into<String>) -> Self {
        Error::DegenerateInput { reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
