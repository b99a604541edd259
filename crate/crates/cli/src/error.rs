use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Library(#[from] stirling_gamma::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(path: &Path, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
