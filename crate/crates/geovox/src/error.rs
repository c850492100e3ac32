//! Application error with the CLI exit-code contract: 2 for usage, input and
//! format problems, 3 for numerical non-convergence or blow-up.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] geovox_core::Error),
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("tracking aborted at frame {frame}: registration diverged; partial trajectory saved")]
    TrackAborted { frame: usize },
}

impl AppError {
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(geovox_core::Error::NotConverged(_))
            | AppError::Core(geovox_core::Error::NumericalBlowup { .. })
            | AppError::TrackAborted { .. } => 3,
            _ => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
