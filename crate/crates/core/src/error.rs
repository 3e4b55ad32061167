use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
