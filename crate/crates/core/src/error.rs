use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while parsing edge lists.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed line {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: endpoint {vertex} is not below the declared vertex count {count}")]
    EndpointOutOfRange {
        line: usize,
        vertex: usize,
        count: usize,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pattern has {pattern} vertices but the host only has {host}")]
    PatternTooLarge { pattern: usize, host: String },
    #[error("graph has {0} vertices; at most 64 are supported here")]
    TooManyVertices(usize),
    #[error("the pattern has no edges")]
    Edgeless,
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("observation contains no copy of the pattern")]
    NoCopies,
}
