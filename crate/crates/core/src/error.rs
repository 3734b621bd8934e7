use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decomposition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input contained NaN/Inf or was otherwise malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter was outside its documented range.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("window too small: need at least {needed} snapshots, got {got}")]
    WindowTooSmall { needed: usize, got: usize },

    /// A retained singular value was zero, so `Sigma^{-1}` does not exist.
    #[error("rank deficiency: singular value {index} of {rank} is zero; use a smaller fixed rank")]
    RankDeficient { index: usize, rank: usize },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Format(#[from] crate::io::FormatError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// `true` for failures of the numerical kernels themselves, as opposed to
    /// bad parameters or malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
