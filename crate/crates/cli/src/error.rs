use std::path::PathBuf;

use jointspec::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION: i32 = 1;
    pub const COMMUTATION: i32 = 2;
    pub const DECOMPOSITION: i32 = 3;
    pub const GRID: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{failures} of {checks} checks failed")]
    Verification { failures: usize, checks: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Parse { path: path.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) => exit::IO,
            CliError::Verification { .. } => exit::VERIFICATION,
            CliError::Core(e) => match e {
                Error::NonCommuting { .. } => exit::COMMUTATION,
                Error::DecompositionFailed { .. }
                | Error::EigenIterationFailed { .. }
                | Error::IllSeparatedCluster { .. }
                | Error::SylvesterIllConditioned { .. }
                | Error::NotInvariant { .. }
                | Error::BoundaryAmbiguous { .. }
                | Error::NearlyDegenerateIdempotent { .. }
                | Error::IllPosedAlpha { .. } => exit::DECOMPOSITION,
                Error::GridTooSmall(_) => exit::GRID,
                // Everything else is an input the command refused to take.
                _ => exit::IO,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
