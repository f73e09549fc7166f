use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: u64 },

    #[error("line {line}: weight must be positive and finite, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("invalid edge ({u}, {v}): {msg}")]
    InvalidEdge { u: usize, v: usize, msg: String },

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph has no edges")]
    Edgeless,

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("insufficient nonedges: need {needed}, graph has {available}")]
    InsufficientNonedges { needed: usize, available: usize },

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("line {line}: step {from} -> {to} is not an edge of the graph")]
    InvalidWalk { line: usize, from: usize, to: usize },

    #[error("{0}")]
    Missing(String),

    #[error("generator is not fitted")]
    NotFitted,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("stage `{stage}` failed ({context}): {source}")]
    Stage {
        stage: &'static str,
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter { name, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str, context: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
