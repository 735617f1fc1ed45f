use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid simplex point: {0}")]
    InvalidSimplexPoint(String),
    #[error("invalid Xi specification: {0}")]
    InvalidXi(String),
    #[error("atom at the origin: zero points belong to the Kingman mass")]
    ZeroAtom,
    #[error("{what} = {value} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("enumeration of {terms} terms exceeds the guard of {guard}")]
    EnumerationGuard { terms: u128, guard: u128 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid rate query: {0}")]
    InvalidQuery(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operation requires a finite-atom Xi")]
    RequiresFiniteAtoms,
    #[error("invalid mutation model: {0}")]
    InvalidMutation(String),
    #[error("event log incomplete: {0}")]
    IncompleteLog(String),
    #[error("inconsistent reproduction event: {0}")]
    InconsistentEvent(String),
}
