use thiserror::Error;

use crate::graphs::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vertex {0} is out of range for a graph with {1} vertices")]
    VertexOutOfRange(VertexId, usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),

    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    Disconnected(VertexId),

    #[error("graph has an empty boundary")]
    EmptyBoundary,

    #[error("vertex {0} lies in the contracted boundary")]
    InBoundary(VertexId),

    #[error("source and sink coincide at vertex {0}")]
    SameTerminal(VertexId),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("graph too large for exact computation: {vertices} vertices (limit {limit})")]
    TooLarge { vertices: usize, limit: usize },

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("unknown graph kind `{0}`")]
    UnknownKind(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
