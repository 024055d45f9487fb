use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),

    #[error("invalid submodular function: {0}")]
    InvalidFunction(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("point is not in the {polytope} polytope: {reason}")]
    NotInPolytope { polytope: &'static str, reason: String },

    #[error("invalid convex combination: {0}")]
    InvalidCombination(String),

    #[error("ground set of size {n} exceeds the exhaustive limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("schema error at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("inconsistent instance: {0}")]
    Inconsistent(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
