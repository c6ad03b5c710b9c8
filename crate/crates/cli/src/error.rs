use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] meshca::Error),

    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 when a run could not produce a result, 2 when the request itself is bad.
    pub fn exit_code(&self) -> u8 {
        use meshca::Error as E;
        match self {
            CliError::Core(E::Infeasible { .. } | E::BudgetExhausted { .. }) => 1,
            CliError::Core(E::InvariantViolation(_)) => 1,
            CliError::Io(..) => 1,
            CliError::Core(_) | CliError::Usage(_) => 2,
        }
    }
}
