use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported geometry: {0}")]
    Unsupported(String),
    #[error("empty range: {0}")]
    EmptyRange(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, MpdError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(MpdError::InvalidInput(msg.into()))
}
