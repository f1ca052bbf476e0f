use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by loading, reducing and evaluating datasets.
#[derive(Debug, Error)]
pub enum RcgError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    /// Input data violates a structural requirement (ragged rows, missing
    /// values, unknown column, too few rows or classes...).
    #[error("data error: {0}")]
    Data(String),

    /// Caller supplied an invalid argument or configuration.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The alive sample holds a single class, so U_0 = 0 and RCG is undefined.
    #[error("degenerate class distribution: {0}")]
    DegenerateClasses(String),

    /// Chi-square degrees of freedom would be non-positive.
    #[error("invalid degrees of freedom: n = {n}, c = {c}")]
    DegreesOfFreedom { n: usize, c: usize },

    #[error("empty feature mask")]
    EmptyFeatureMask,

    #[error("empty prototype set")]
    EmptyPrototypes,

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl RcgError {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        RcgError::Data(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RcgError::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        RcgError::DegenerateClasses(msg.into())
    }

    /// Process exit code used by the command-line front end: 1 for usage
    /// errors, 2 for data errors, 3 for degenerate statistics.
    pub fn exit_code(&self) -> i32 {
        match self {
            RcgError::InvalidArgument(_) => 1,
            RcgError::Io { .. }
            | RcgError::Csv(_)
            | RcgError::Data(_)
            | RcgError::EmptyFeatureMask
            | RcgError::EmptyPrototypes
            | RcgError::Json(_) => 2,
            RcgError::DegenerateClasses(_) | RcgError::DegreesOfFreedom { .. } => 3,
        }
    }
}

pub type Result<T, E = RcgError> = std::result::Result<T, E>;
