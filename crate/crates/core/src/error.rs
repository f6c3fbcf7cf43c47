use thiserror::Error;

/// Errors produced by the tree, path and metric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid excursion: {0}")]
    InvalidExcursion(String),
    #[error("{what} = {value} outside of its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },
    #[error("straddle at ({s}, {a}) is degenerate; nothing to excise")]
    EmptyExcision { s: f64, a: f64 },
    #[error("straddle at level {a} covers the whole excursion; excision would leave nothing")]
    FullExcision { a: f64 },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid point reference: {0}")]
    InvalidPoint(String),
    #[error("tree has zero total length")]
    DegenerateTree,
    #[error("invalid metric input: {0}")]
    InvalidMetric(String),
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
    #[error("not enough qualifying samples: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Error {
    Error::Domain {
        what,
        value,
        domain: domain.into(),
    }
}
