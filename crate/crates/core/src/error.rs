use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subword [{i}:{j}] out of range for word of length {len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {what} needs {needed}, budget is {budget}")]
    ResourceLimit { what: &'static str, needed: u128, budget: u128 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
}
