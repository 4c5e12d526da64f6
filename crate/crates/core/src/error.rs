use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n={expected}, got n={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid labelling: {0}")]
    InvalidLabelling(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("enumeration infeasible: n={n} exceeds cap {cap}")]
    EnumerationInfeasible { n: usize, cap: usize },

    #[error("class count {ell} exceeds permutation cap {cap}")]
    PermutationCapExceeded { ell: usize, cap: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("posterior odds undefined: both hypothesis sets have mass zero")]
    UndefinedOdds,

    #[error("hypothesis sets are not disjoint: both contain {0}")]
    NotDisjoint(String),

    #[error("zero prior mass at {0}")]
    ZeroPriorMass(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 1 usage, 2 assumption violation,
    /// 3 infeasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AssumptionViolated(_) => 2,
            Error::EnumerationInfeasible { .. } | Error::PermutationCapExceeded { .. } => 3,
            _ => 1,
        }
    }
}
