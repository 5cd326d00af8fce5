use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time series is empty")]
    EmptySeries,

    #[error("timestamps and values differ in length ({timestamps} vs {values})")]
    LengthMismatch { timestamps: usize, values: usize },

    #[error("timestamp at position {index} is not strictly greater than its predecessor")]
    NonMonotone { index: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("relevance exponent p must be in 1..=16, got {0}")]
    InvalidExponent(u32),

    #[error("threshold beta must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("query shape must have odd, nonzero length, got {0}")]
    InvalidQueryLength(usize),

    #[error("query of length {query} is longer than the series ({series})")]
    QueryTooLong { query: usize, series: usize },

    #[error("score at position {index} is negative or not finite ({value})")]
    InvalidScore { index: usize, value: f64 },

    #[error("segment count {n_prime} must lie in 1..={n}")]
    InvalidSegmentCount { n_prime: usize, n: usize },

    #[error("coupling covers {coupling} points but {timestamps} timestamps were given")]
    CouplingMismatch { coupling: usize, timestamps: usize },

    #[error("segmentation point {point} does not coincide with a sample timestamp")]
    UnalignedPoint { point: f64 },

    #[error("accuracy alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("observed timestamp {got} does not exceed the last stored timestamp {last}")]
    OutOfOrder { last: f64, got: f64 },

    #[error("synopsis is empty")]
    EmptySynopsis,

    #[error("interval [{start}, {end}] contains no samples")]
    EmptyInterval { start: f64, end: f64 },

    #[error("invalid interval label: {0}")]
    InvalidLabel(String),

    #[error("labels `{first}` and `{second}` overlap")]
    OverlappingLabels { first: String, second: String },

    #[error("unsupported snapshot version {0}")]
    SnapshotVersion(u32),

    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
