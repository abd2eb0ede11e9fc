use thiserror::Error;

use crate::kronecker::KroneckerSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator basis: {0}")]
    InvalidBasis(String),

    #[error("basis mismatch: operands were built over different generator bases")]
    BasisMismatch,

    #[error("integer overflow in generator coefficients")]
    CoefficientOverflow,

    #[error(
        "generator list exhausted after {available} entries; supply explicit generator values"
    )]
    GeneratorsExhausted { available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "convolution budget exceeded: largest completed power is 2^{largest_completed} ({reason})"
    )]
    BudgetExceeded {
        largest_completed: u32,
        reason: String,
    },

    #[error("point {re}+{im}i lies outside the closed unit disk")]
    OutOfDisk { re: f64, im: f64 },

    #[error("no integer n with |n| <= {n_max} meets the bound (best candidate n = {})", best.n)]
    NotFound {
        n_max: i64,
        best: Box<KroneckerSolution>,
    },

    #[error("{free} free generators exceed the supported torus dimension {max}")]
    UnsupportedDimension { free: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty point set")]
    EmptyInput,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
