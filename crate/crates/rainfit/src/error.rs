use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error("{0}")]
    Fit(String),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn config(message: impl Into<String>) -> Self {
        AppError::Config(message.into())
    }

    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        AppError::Io { path: path.as_ref().to_path_buf(), source }
    }

    pub fn data(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        AppError::Data { path: path.as_ref().to_path_buf(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => exit::CONFIG,
            AppError::Io { .. } => exit::IO,
            AppError::Fit(_) => exit::FIT_FAILED,
            AppError::Data { .. } => exit::DATA,
        }
    }
}

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const IO: u8 = 3;
    /// `benchmark`: every fit failed. `fit`: the fit did not converge.
    pub const FIT_FAILED: u8 = 4;
    /// Unreadable or empty site data.
    pub const DATA: u8 = 5;
}
