use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("vertex {vertex} out of range for a graph with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("edge {edge} out of range for a graph with {count} edges")]
    EdgeOutOfRange { edge: usize, count: usize },

    #[error("graph has no edges")]
    EmptyEdgeSet,

    #[error("partition covers {found} vertices, graph has {expected}")]
    PartitionMismatch { expected: usize, found: usize },

    #[error("vertex {0} is isolated and cannot be assigned to a neighboring cluster")]
    IsolatedVertex(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Domain(String),

    #[error("non-finite opinion value at t = {time}")]
    NumericalFailure { time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::Domain(message.into()))
}
