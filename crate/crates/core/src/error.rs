use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by library operations.
///
/// Per-record parse failures are not represented here; those are counted in
/// [`crate::ingest::CorpusStats`] and never abort a pass.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),
    #[error("malformed cascade record on line {line}: {reason}")]
    CascadeRecord { line: usize, reason: String },
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series too short: need at least {min} bins with total >= {min}, got {bins} bins totalling {total}")]
    SeriesTooShort { min: usize, bins: usize, total: f64 },
    #[error("series has no positive observations")]
    AllZero,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("evaluation set is empty")]
    EmptyEvaluation,
    #[error("predicted and truth item sets differ (e.g. {0:?})")]
    ItemMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
