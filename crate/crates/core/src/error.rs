use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: no valid rows")]
    NoValidRows { path: String },

    #[error("{path}: missing `{column}` column in header")]
    MissingColumn { path: String, column: &'static str },

    #[error("duplicate date {date} in series {asset}")]
    DuplicateDate { asset: String, date: NaiveDate },

    #[error("series {asset} has {len} rows, need more than {horizon}")]
    SeriesTooShort {
        asset: String,
        len: usize,
        horizon: usize,
    },

    #[error("unsupported return horizon {0} (expected 1 or 5)")]
    BadHorizon(usize),

    #[error("ewma decay {0} must lie strictly between 0 and 1")]
    BadDecay(f64),

    #[error("zero volatility with non-zero return on {date} in {asset}")]
    DegenerateVolatility { asset: String, date: NaiveDate },

    #[error("date {date} of {asset} has no matching volatility row")]
    Misaligned { asset: String, date: NaiveDate },

    #[error("model {model} requires asset {asset}")]
    MissingAsset { model: String, asset: String },

    #[error("no common dates across the assets of {0}")]
    EmptyIntersection(String),

    #[error("non-finite feature value on {0}")]
    NonFiniteFeature(NaiveDate),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("frame with {rows} rows cannot host an episode of {episode_length} steps")]
    FrameTooShort { rows: usize, episode_length: usize },

    #[error("episode already finished")]
    EpisodeDone,

    #[error("shape mismatch: expected width {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("replay buffer holds {available} transitions, batch needs {requested}")]
    InsufficientTransitions { available: usize, requested: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("training diverged in episode {episode}: {source}")]
    Diverged {
        episode: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised while validating inputs, before any work starts.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::MissingAsset { .. }
                | Error::ShapeMismatch { .. }
                | Error::VersionMismatch { .. }
                | Error::InvalidSplit(_)
        )
    }
}
