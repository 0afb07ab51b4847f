use thiserror::Error;

/// Errors raised by the permutation, Mallows and demixing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size mismatch: expected n = {expected}, found n = {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid comparison tuple: {0}")]
    InvalidTuple(String),

    #[error("invalid block structure: {0}")]
    InvalidBlockStructure(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("duplicate permutation in input: {0}")]
    DuplicatePermutation(String),

    #[error("exact enumeration needs n = {n} but the cap is {cap}; use the sampling path instead")]
    EnumerationCap { n: usize, cap: usize },

    #[error("class too large: {count} candidates exceeds the limit of {limit}")]
    ClassTooLarge { count: u128, limit: u128 },

    #[error("oracle answers are inconsistent: {0}")]
    InconsistentOracle(String),

    #[error("theoretical mode infeasible: {0}; use practical mode")]
    TheoreticalInfeasible(String),

    #[error("empty candidate set: {0}")]
    EmptyCandidates(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
