use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("vector must have unit norm (got {norm})")]
    NotUnit { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point outside the chart domain: {0}")]
    ChartDomain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no converged solution: {0}")]
    NoSolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
