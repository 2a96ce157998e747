use flock_core::FlockError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or unreadable configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// The numerics failed on a valid configuration; exit code 3.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<FlockError> for CliError {
    fn from(e: FlockError) -> Self {
        match e {
            FlockError::Domain(_) | FlockError::Dimension(_) | FlockError::Unsupported(_) => {
                CliError::Config(e.to_string())
            }
            FlockError::DegenerateRow { .. }
            | FlockError::BlowUp { .. }
            | FlockError::StepUnderflow { .. }
            | FlockError::Sampling(_)
            | FlockError::Singular(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
