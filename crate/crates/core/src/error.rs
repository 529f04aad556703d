use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hypergraph has no hyperedges with at least two nodes")]
    EmptyHypergraph,

    #[error("node index {index} out of range for {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },

    #[error("hyperedge {edge} lists node {node} more than once")]
    DuplicateNode { edge: usize, node: usize },

    #[error("hyperedge weight must be positive and finite (edge {edge}: {value})")]
    NonPositiveTheta { edge: usize, value: f64 },

    #[error("length mismatch: {what} (expected {expected}, got {got})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid node set: {0}")]
    InvalidNodeSet(String),

    #[error("conductance undefined: {0}")]
    UndefinedConductance(&'static str),

    #[error("cut-cost {cost} is not defined on a hyperedge of size {size}")]
    CutCostSize { cost: &'static str, size: usize },

    #[error("invalid cut-cost table: {0}")]
    InvalidTable(String),

    #[error("subset enumeration limited to {limit} nodes, got {size}")]
    SizeLimit { size: usize, limit: usize },

    #[error("unsupported combination: {cost} cut-cost with p = {p}")]
    UnsupportedCombination { cost: &'static str, p: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bisection failed to bracket a root ({0})")]
    Bracketing(String),

    #[error("all-zero embedding: nothing to sweep")]
    ZeroEmbedding,

    #[error("target outside achievable range: {0}")]
    Unachievable(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
