use std::path::PathBuf;

use crate::framework::FrameworkTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("model is not usable: {0}")]
    InvalidModel(String),

    #[error("empty input")]
    EmptyInput,

    #[error("parse error at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record on line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported trace schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("interval has zero length; shrink rate is singular")]
    Singular,

    #[error("consecutive critical intervals are disjoint")]
    DisjointIntervals,

    #[error("map is not a contraction (K = {k})")]
    NotAContraction { k: f64 },

    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("alpha schedule exhausted")]
    ScheduleExhausted,

    #[error("all mixture components were dropped at step {step}")]
    AllComponentsDropped { step: usize, trace: Box<FrameworkTrace> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
