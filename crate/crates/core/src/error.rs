use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("infeasible pinning or configuration")]
    Infeasible,
    #[error("graph error: {0}")]
    Graph(String),
    #[error("transition matrix is not reversible (residual {0:e})")]
    NotReversible(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}
