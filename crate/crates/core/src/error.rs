use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("{0} is not a prime")]
    NotPrime(u32),

    #[error("blocks {first} and {second} are identical; canonical search requires distinct blocks")]
    DuplicateBlocks { first: usize, second: usize },

    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },

    #[error("generator {generator} does not preserve the block set")]
    NotPreserved { generator: usize },

    #[error("invalid expansion problem: {0}")]
    InvalidProblem(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
