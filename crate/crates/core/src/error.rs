use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("nodes are not pairwise distinct")]
    DegenerateNodes,
    #[error("node {index} is zero")]
    ZeroNode { index: usize },
    #[error("expected {expected} values, got {got}")]
    ArityError { expected: usize, got: usize },
    #[error("polynomial degree {degree} must be below the node count {nodes}")]
    DegreeError { degree: usize, nodes: usize },
    #[error("lambda_{index} is zero")]
    ZeroLambda { index: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("{0}")]
    DomainError(String),
    #[error("pole of the Gamma function at {0}")]
    PoleError(String),
    #[error("reference oracle unstable: {0}")]
    OracleUnstable(String),
    #[error("invalid grid: {0}")]
    GridError(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureError(String),
    #[error("continued fraction breaks down at level {level}")]
    ContFracBreakdown { level: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}
