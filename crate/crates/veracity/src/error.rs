//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A rate or probability fell outside [0, 1].
    #[error("{name} must be in [0, 1], got {value}")]
    RateOutOfRange { name: &'static str, value: f64 },

    /// An outcome mass violated its invariants (negative component or sum != 1).
    #[error("invalid outcome mass: {0}")]
    InvalidMass(String),

    /// A malformed line in a tabular or JSONL input.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// Invalid generator or pipeline configuration.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Paired t-test needs at least two pairs.
    #[error("paired t-test requires at least 2 pairs, got {0}")]
    InsufficientPairs(usize),

    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
