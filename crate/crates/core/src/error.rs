use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdimError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge {0}-{1}")]
    ParallelEdge(usize, usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph is disconnected")]
    DisconnectedInput,
    #[error("graph is not outerplanar: {0}")]
    NotOuterplanar(String),
    #[error("graph is not a tree")]
    NotATree,
    #[error("graph too small: need at least {min} vertices, got {got}")]
    TooSmall { min: usize, got: usize },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("ambiguous representative of {landmark}: closest vertices {closest:?}")]
    AmbiguousRepresentative { landmark: usize, closest: Vec<usize> },
    #[error("h({vertex}) is ill-defined: g(v, L) spans several branches")]
    IllDefined { vertex: usize },
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, MdimError>;
