use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("arithmetic failure: {0}")]
    Arithmetic(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("{step}: {reason}")]
    Attack { step: String, reason: String },
}

impl Error {
    pub fn attack(step: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Attack {
            step: step.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
