use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] foops::Error),

    #[error("{failed} of {total} runs failed; see summary for details")]
    RunsFailed { failed: usize, total: usize },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) | BenchError::InvalidComparison(_) => 1,
            BenchError::Core(e) if is_config_error(e) => 1,
            _ => 2,
        }
    }
}

fn is_config_error(e: &foops::Error) -> bool {
    use foops::Error::*;
    matches!(
        e,
        InvalidConfig(_) | InvalidPreference(_) | UnsupportedConfiguration(_) | DimensionMismatch { .. }
    )
}

pub type Result<T> = std::result::Result<T, BenchError>;
