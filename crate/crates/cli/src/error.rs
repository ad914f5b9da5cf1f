use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("invariant check failed: {0}")]
    Invariant(String),
    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] hetero_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Core(hetero_core::Error::NonConvergence(_)) => 3,
            CliError::Core(
                hetero_core::Error::Geometry(_)
                | hetero_core::Error::EmptySection(_)
                | hetero_core::Error::EmptyMask
                | hetero_core::Error::InvalidArgument(_)
                | hetero_core::Error::CutoffPrecondition(_)
                | hetero_core::Error::DegenerateMinimum(_),
            ) => 2,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}
