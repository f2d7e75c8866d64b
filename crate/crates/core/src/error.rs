use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({src}, {dst}) has an endpoint outside [0, {num_nodes})")]
    EdgeOutOfRange {
        src: usize,
        dst: usize,
        num_nodes: usize,
    },

    #[error("node {node} is outside [0, {num_nodes})")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("homophily ratio is undefined for a graph without edges")]
    NoEdges,

    #[error("permutation is not a bijection on [0, {num_nodes}): {reason}")]
    NotABijection { num_nodes: usize, reason: String },

    #[error("label {label} is outside [0, {num_classes})")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("length mismatch: expected {expected} {what}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("no structural features requested and no raw features to fall back on")]
    EmptyFeatures,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite loss at epoch {epoch} (first bad tensor: {layer})")]
    NonFiniteLoss { epoch: usize, layer: String },

    #[error("class {class} has only {count} nodes; at least 3 are needed for a 60/20/20 split")]
    ClassTooSmall { class: usize, count: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("every search trial failed:\n{0}")]
    AllTrialsDiverged(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
