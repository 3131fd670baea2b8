use std::path::{Path, PathBuf};

/// Failures of the file-level tools, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("external denoiser: {0}")]
    External(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bimgraph_core::Error),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Self::Parse { path: path.to_path_buf(), line, msg: msg.into() }
    }

    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        Self::Format { path: path.to_path_buf(), msg: msg.into() }
    }

    /// 2 for broken internal invariants, 1 for everything caused by inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(bimgraph_core::Error::InvariantViolation(_)) => 2,
            _ => 1,
        }
    }
}
