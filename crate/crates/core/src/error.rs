use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    Empty,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("counting weights sum to {sum}, expected {n}")]
    WeightSum { n: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("basis is not orthonormal (max deviation {0:e})")]
    NonUnitary(f64),

    #[error("eigenvalue tuples {0} and {1} coincide")]
    DuplicateEigtuple(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("inconsistent spectral pair: P = {p:e} on cell {cell} outside the spectral support")]
    InconsistentPair { cell: usize, p: f64 },

    #[error("partition part {0} carries no spectral weight")]
    EmptyPart(usize),

    #[error("reparametrization is not strictly increasing at sample {0}")]
    NonMonotone(usize),

    #[error("need at least {need} entries, got {got}")]
    TooFew { need: usize, got: usize },

    #[error("integer overflow computing {kappa}^{k}")]
    Overflow { kappa: u64, k: u32 },

    #[error("{0}")]
    Invalid(String),
}

/// Coarse classification used by frontends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input.
    Validation,
    /// A density matrix violates Hermiticity, unit trace or positivity.
    Invariant,
    /// An iterative numerical routine failed to converge.
    NonConvergence,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotHermitian(_) | Error::InvalidTrace(_) | Error::NotPositive(_) => {
                ErrorClass::Invariant
            }
            Error::NoConvergence { .. } => ErrorClass::NonConvergence,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
