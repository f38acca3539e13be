use std::path::PathBuf;

use thiserror::Error;

use crate::mdp::ValidationReport;
use crate::solvers::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid MDP:\n{0}")]
    Validation(ValidationReport),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error(
        "solver did not converge after {} outer iterations (residual {:e})",
        .0.stats.outer_iterations,
        .0.stats.residual_history.last().copied().unwrap_or(f64::NAN)
    )]
    NotConverged(Box<SolveResult>),

    #[error("worker count must be at least 1")]
    InvalidWorkerCount,

    #[error("expected {expected} per-worker contributions, got {found}")]
    PartitionMismatch { expected: usize, found: usize },

    #[error("bad magic bytes {0:?}, expected \"MDPB\"")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    BadVersion(u32),

    #[error("truncated file: need {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("generator callback failed at state {state}, action {action}: {message}")]
    Callback {
        state: usize,
        action: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
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
}
