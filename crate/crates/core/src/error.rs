use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("source and sink are the same node ({0})")]
    SameEndpoints(NodeId),

    #[error("topology has no monitors")]
    NoMonitors,

    #[error("at least two monitors are required, found {0}")]
    TooFewMonitors(usize),

    #[error("node {0} is not a monitor")]
    NotMonitor(NodeId),

    #[error("node {0} is a monitor")]
    IsMonitor(NodeId),

    #[error("node set is empty")]
    EmptySet,

    #[error("k = {k} is outside the supported range [{lo}, {hi}]")]
    KOutOfRange { k: usize, lo: usize, hi: usize },

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("topology is empty")]
    EmptyTopology,

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("no connected realization after {0} attempts")]
    RetriesExhausted(usize),

    #[error("target of {target} links is unachievable: {reason}")]
    Unachievable { target: f64, reason: String },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("{}:{line}: {msg}", source_name.display())]
    Parse {
        source_name: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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
