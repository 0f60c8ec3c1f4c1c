use std::io;

use thiserror::Error;

/// Errors surfaced by the command-line front-end, each with an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] sis_atoms::Error),
}

impl CliError {
    /// 2 for input errors, 3 for resource caps, 4 for convergence failures.
    pub fn exit_code(&self) -> i32 {
        use sis_atoms::Error as E;
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::ResourceCap(_) => 3,
                E::Convergence { .. } | E::Integration(_) | E::Consistency(_) => 4,
                E::Dimension { .. }
                | E::InvalidModel(_)
                | E::InvalidIncidence(_)
                | E::Input(_)
                | E::Precondition(_)
                | E::NotAdmissible(_) => 2,
            },
        }
    }

    pub(crate) fn io(path: &str, source: io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
