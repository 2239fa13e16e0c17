use std::io;

use thiserror::Error;

/// Failure of a command, split by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable files, malformed CSV or config, invalid flag values.
    #[error("{0}")]
    Input(String),
    /// The data parsed but the fit or an estimator could not be computed.
    #[error("{0}")]
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }

    pub(crate) fn io(context: impl std::fmt::Display, err: io::Error) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }
}

impl From<sandwich_lab::Error> for CliError {
    fn from(e: sandwich_lab::Error) -> Self {
        if e.is_estimation_error() {
            CliError::Estimation(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
