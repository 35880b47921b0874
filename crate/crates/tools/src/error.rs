use std::path::PathBuf;

pub type Result<T, E = ToolError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error(transparent)]
    Core(#[from] scenegraph_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Format(String),
}

impl ToolError {
    /// Process exit code: 2 for numeric failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| ToolError::Io { path: path.into(), source })
    }
}

macro_rules! config_err {
    ($($arg:tt)*) => {
        $crate::error::ToolError::Config(format!($($arg)*))
    };
}
pub(crate) use config_err;
