use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate probability {value} at ({row}, {col}); the fitted model assigns (near-)deterministic edges")]
    DegenerateProbability { row: usize, col: usize, value: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("maximum likelihood estimate does not exist: {0}")]
    MleNonexistent(String),

    #[error("no convergence after {iterations} iterations: {msg}")]
    NonConvergence { iterations: usize, msg: String },

    #[error("probability {0} outside the supported range")]
    Domain(f64),

    #[error("bootstrap: {0}")]
    Bootstrap(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
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
