use crate::trace::SolveTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid preference: {0}")]
    InvalidPreference(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("unsupported dimension: expected {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The iterate left the finite region or exceeded the divergence bound.
    /// The partial trace up to the failure is attached.
    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged {
        iteration: usize,
        reason: String,
        trace: Box<SolveTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_finite(what: &str, x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} contains non-finite entries")))
    }
}

pub(crate) fn ensure_len(x: &[f64], expected: usize) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got: x.len() })
    }
}
