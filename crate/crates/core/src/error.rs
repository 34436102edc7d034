use thiserror::Error;

use crate::assignment::Matching;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One problem found while validating a raw instance description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("duplicate agent identifier `{0}`")]
    DuplicateAgent(String),
    #[error("duplicate object identifier `{0}`")]
    DuplicateObject(String),
    #[error("object `{0}` has capacity {1}, capacities must be at least 1")]
    BadCapacity(String, u64),
    #[error("agent `{agent}` lists unknown object `{object}`")]
    UnknownObject { agent: String, object: String },
    #[error("duplicate preference: agent `{agent}` lists object `{object}` more than once")]
    DuplicatePreference { agent: String, object: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{agents} agents exceed the enumeration limit of {limit}")]
    EnumerationLimit { agents: usize, limit: usize },

    #[error("decomposition weights sum to {0}, expected 1")]
    WeightsDoNotSumToOne(String),

    #[error("empty decomposition")]
    EmptyDecomposition,

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A decomposition of an assignment that was expected to be robust
    /// ex-post efficient contained a matching that is not Pareto efficient.
    #[error("matching {matching:?} in the decomposition is not Pareto efficient")]
    NotParetoEfficient { matching: Matching },

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("invalid generator parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
