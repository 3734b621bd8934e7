use thiserror::Error;

/// A failed run, carrying its exit code: 1 for numerical failures, 2 for
/// usage, configuration and input errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] mrdmd::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Core(e) if e.is_numerical() => 1,
            CliError::Usage(_) | CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
