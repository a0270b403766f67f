use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),
    /// A result was computed but its truncation or quadrature error exceeds
    /// the allowed bound.
    #[error("accuracy failure: {0}")]
    Accuracy(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
