use thiserror::Error;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numerical(_) | CliError::Output(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
