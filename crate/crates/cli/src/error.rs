use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] knotfield::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for failed checks, 2 for usage and configuration errors, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) | CliError::Core(_) => 1,
            CliError::Usage(_) | CliError::InvalidConfig(_) => 2,
            CliError::Io { .. } | CliError::Parse { .. } => 3,
        }
    }
}
