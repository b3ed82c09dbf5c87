use thiserror::Error;

/// Errors produced by the training library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset error: {0}")]
    Data(String),

    #[error("kernel error: {0}")]
    Kernel(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Solver,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) => ErrorClass::Usage,
            Error::EmptyInput | Error::Parse { .. } | Error::Data(_) | Error::Io(_) => {
                ErrorClass::Data
            }
            Error::Kernel(_) | Error::Solver(_) => ErrorClass::Solver,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
