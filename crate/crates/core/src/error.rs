use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid distribution: {0}")]
    InvalidDist(String),
    #[error("divergence undefined: {0}")]
    DivergenceUndefined(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate observation: {0}")]
    Degenerate(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
