use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("extension degree {0} out of range (1..=16)")]
    BadDegree(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}: {reason}")]
    NotPrimitive { poly: u32, m: u32, reason: String },
    #[error("element {0} is not invertible")]
    ZeroInverse(u32),
    #[error("basis elements are linearly dependent over GF(2)")]
    DependentBasis,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix size {0} exceeds the supported maximum 2^20")]
    TooLarge(usize),
    #[error("input rows are linearly dependent (rank {rank} < {rows})")]
    DependentRows { rank: usize, rows: usize },
    #[error("design distance {d} out of range 2..={n}")]
    BadDesignDistance { d: usize, n: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("dimension k={k} too large for exhaustive enumeration (limit {limit})")]
    EnumerationTooLarge { k: usize, limit: usize },
    #[error("index {0} is not frozen")]
    NotFrozen(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("profile kind mismatch: expected {expected}, got {got}")]
    ProfileKind { expected: String, got: String },
    #[error("requested dimension {k} exceeds parent dimension {max}")]
    Infeasible { k: usize, max: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
