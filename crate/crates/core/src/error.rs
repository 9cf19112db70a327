use thiserror::Error;

/// Every failure the library can report. Negative findings (a predicate that
/// does not hold, a relation that is not a simulation) are values, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("machine is not accepted: {0}")]
    NotAccepted(String),
    #[error("incompatible external alphabets: {0}")]
    IncompatibleAlphabets(String),
    #[error("malformed relation: {0}")]
    MalformedRelation(String),
    #[error("machine digest mismatch: expected {expected}, found {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("invalid interval: {0}")]
    InvalidSpec(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid symbol `{0}`")]
    InvalidSymbol(String),
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
