//! Library-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("self-loop dyad ({0}, {0}) is not allowed")]
    SelfLoop(u32),

    #[error("vertex {v} out of range for graph with {n} vertices")]
    VertexOutOfRange { v: u32, n: u32 },

    #[error("dyad index {index} out of range (dyad count {count})")]
    DyadIndexOutOfRange { index: u64, count: u64 },

    #[error("invalid entry groups: {0}")]
    InvalidGroups(String),

    #[error("order is inconsistent with the graph: {0}")]
    OrderMismatch(String),

    #[error("term `{term}` requires a vertex-entry ordering")]
    OrderRequired { term: String },

    #[error("term `{term}` is order-dependent; use gmm_fit with order-independent moment statistics")]
    OrderDependentTerm { term: String },

    #[error("vertex attribute `{0}` not found")]
    MissingAttribute(String),

    #[error("vertex attribute `{name}` is not {expected}")]
    AttributeType { name: String, expected: &'static str },

    #[error("attribute `{attr}` has no level `{level}`")]
    UnknownLevel { attr: String, level: String },

    #[error("term `{term}` has identically zero change statistics on this data (non-identifiable)")]
    NonIdentifiable { term: String },

    #[error("matrix is singular to working tolerance in {0}")]
    Singular(&'static str),

    #[error("covariance matrix not positive definite after ridge escalation")]
    IndefiniteCovariance,

    #[error("exact enumeration infeasible: {0}")]
    NonEnumerable(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{file}: parse error at line {line}: {msg}")]
    Parse {
        file: String,
        line: u64,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
