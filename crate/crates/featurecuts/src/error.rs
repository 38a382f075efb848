//! The crate-wide error type.

use std::path::PathBuf;
use std::time::Duration;

use crate::pipeline::SelectionReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("row {row}, column '{column}': {message}")]
    Ingest { row: usize, column: String, message: String },
    #[error("target column '{0}' not found in header")]
    MissingTargetColumn(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid column subset: {0}")]
    Subset(String),
    #[error("metric '{metric}' is incompatible with task '{task}'")]
    MetricTaskMismatch { metric: String, task: String },
    #[error(transparent)]
    Stats(#[from] featurecuts_core::stats::StatsError),
    #[error(transparent)]
    Metrics(#[from] featurecuts_core::metrics::MetricsError),
    #[error(transparent)]
    FsScore(#[from] featurecuts_core::score::FsError),
    #[error("evaluator: {0}")]
    Evaluator(String),
    #[error("external evaluator protocol: {0}")]
    Protocol(String),
    #[error("external evaluator timed out after {0:?}")]
    Timeout(Duration),
    #[error("cutoff domain is empty (no features)")]
    EmptyCutoffDomain,
    #[error("cutoff evaluation at k={k} failed twice: {source}")]
    CutoffEvalFailed {
        k: usize,
        #[source]
        source: Box<Error>,
        partial_trace: Vec<(usize, f64)>,
    },
    #[error("swarm aborted: {source}")]
    PsoAborted {
        #[source]
        source: Box<Error>,
        best_so_far: Option<(Vec<usize>, f64)>,
    },
    #[error("pipeline stage '{stage}' failed: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: Box<Error>,
        partial: Box<SelectionReport>,
    },
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
