use lodcdf_core::{DataError, Error as CoreError, SimError};
use thiserror::Error;

/// CLI failure classes. Each maps to its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Ingest { path: String, message: String },
    #[error("{0}")]
    AllCensored(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{0}")]
    AllDegenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Ingest { .. } => 3,
            CliError::AllCensored(_) => 4,
            CliError::InvalidParams(_) => 5,
            CliError::AllDegenerate(_) => 6,
        }
    }

    pub(crate) fn from_ingest(path: &str, err: CoreError) -> Self {
        match err {
            CoreError::Data(DataError::AllCensored) => CliError::AllCensored(format!("{path}: {err}")),
            CoreError::Data(DataError::Io(message)) => CliError::Io { path: path.into(), message },
            other => CliError::Ingest { path: path.into(), message: other.to_string() },
        }
    }

    pub(crate) fn from_sim(err: CoreError) -> Self {
        match err {
            CoreError::Sim(SimError::AllDegenerate(_)) => CliError::AllDegenerate(err.to_string()),
            other => CliError::InvalidParams(other.to_string()),
        }
    }
}
