use thiserror::Error;

use crate::operator::TermKind;

pub type Result<T> = std::result::Result<T, DjcError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DjcError {
    #[error("site {site} is outside the register of {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },
    #[error("duplicate site {0} in term")]
    DuplicateSite(usize),
    #[error("{kind:?} term needs {expected} sites, got {got}")]
    WrongArity {
        kind: TermKind,
        expected: usize,
        got: usize,
    },
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("target is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{0} qubits exceeds the dense simulation cap")]
    TooManyQubits(usize),
    #[error("the balanced subspace needs an even number of qubits, got {0}")]
    OddQubitCount(usize),
    #[error("a code needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("expected {expected} pair signs, got {got}")]
    SignCount { expected: usize, got: usize },
    #[error("pair sign must be +1 or -1, got {0}")]
    InvalidSign(i8),
    #[error("amplitudes are not normalized (norm {0:.15})")]
    NotNormalized(f64),
    #[error("logical index {index} out of range 1..={n_logical}")]
    LogicalIndexOutOfRange { index: usize, n_logical: usize },
    #[error("controlled phase needs two distinct logical qubits, got {0} twice")]
    SameLogicalQubit(usize),
    #[error("the Ising-from-XY sequence couples odd qubits, got {0}")]
    EvenIndex(usize),
    #[error("decay rate {0} is negative")]
    NegativeRate(f64),
    #[error("time step {dt} with max rate {max_rate} violates dt*kappa < {limit}")]
    StepTooLarge { dt: f64, max_rate: f64, limit: f64 },
    #[error("pair {0} has zero coupling")]
    ZeroCoupling(usize),
    #[error("{0:?} term not permitted by the {1} control model")]
    ModelViolation(TermKind, &'static str),
    #[error("recovery images are not orthonormal (residual {0:.3e})")]
    BrokenFrame(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
