use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input.
    #[error("{0}")]
    Input(String),
    /// Series truncated below the weight an operation needs.
    #[error("insufficient truncation: {0}")]
    Truncation(String),
    #[error("scheme is invalid:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    /// A check that must hold by construction did not.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
