use thiserror::Error;

/// Errors produced by the detectors, the generator and the file readers.
///
/// The variants partition failures into the classes the CLI maps onto exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A precondition that the orchestration code itself is responsible for
    /// was violated.
    #[error("internal contract violation: {0}")]
    Contract(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
