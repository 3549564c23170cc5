use std::process::ExitCode;

use qsimkit::QsimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::NotConverged(_) => ExitCode::from(3),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<QsimError> for CliError {
    fn from(e: QsimError) -> Self {
        match e {
            QsimError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            QsimError::InvalidArgument(_) | QsimError::Parse(_) | QsimError::OutOfRange { .. } | QsimError::TooLarge(..) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
