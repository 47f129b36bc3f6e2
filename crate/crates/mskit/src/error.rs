use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} is not in the open unit disk")]
    OutsideDisk(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("oversized input: index span {span} exceeds cap {cap}")]
    Oversized { span: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid Blaschke product: {0}")]
    Blaschke(String),
    #[error("space tag mismatch: {0}")]
    TagMismatch(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
