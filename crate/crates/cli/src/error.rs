use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {pointer}: {message}")]
    Schema { path: PathBuf, pointer: String, message: String },

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] zonoverify::Error),

    /// A certificate failed its independent re-check.
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Core(zonoverify::Error::Input(_) | zonoverify::Error::DimensionMismatch { .. }) => 2,
            CliError::Core(zonoverify::Error::Resource(_)) => 3,
            CliError::Read { .. } | CliError::Write(_) | CliError::Certificate(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
