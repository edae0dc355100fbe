use std::path::PathBuf;

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

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("requested {requested} {what}, only {available} available")]
    Infeasible {
        what: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("node id {id} out of range for graph with {num_nodes} nodes")]
    InvalidNode { id: usize, num_nodes: usize },

    #[error("forget set is empty")]
    EmptyForgetSet,

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("loss must be a 1x1 scalar, got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("non-finite value in {context} at epoch {epoch}")]
    Diverged { context: &'static str, epoch: usize },

    #[error("non-finite gradient entry in parameter tensor {tensor}")]
    NonFiniteGradient { tensor: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("report field `{0}` missing")]
    MissingField(&'static str),

    #[error("report field `{field}` out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
