use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: usize },

    #[error("duplicate header name {0:?}")]
    DuplicateHeader(String),

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("incompatible datasets: {0}")]
    Incompatible(String),

    #[error("feature mask has no active features")]
    EmptyMask,

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("k = {k} is out of range for {available} training samples")]
    KOutOfRange { k: usize, available: usize },

    #[error("test_count {test_count} must be in 1..{total}")]
    SplitOutOfRange { test_count: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("feature count {feature_count} exceeds exhaustive search guard {max}")]
    SearchTooLarge { feature_count: usize, max: usize },

    #[error("pca needs {0}")]
    Pca(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
