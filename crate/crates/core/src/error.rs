use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Operations are total on empty inputs (0-row or 0-column matrices are legal
/// everywhere); errors are reserved for genuine contract violations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("generator is not invertible over the integers (determinant {det})")]
    NotInvertible { det: String },
    #[error("group closure exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: usize },
    #[error("element index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("matrix does not satisfy sigma^{order} = 1")]
    NotPeriodic { order: usize },
    #[error("the two lattices are modules over different groups")]
    GroupMismatch,
    #[error("action matrices do not satisfy the relations of the generators")]
    InvalidAction,
    #[error("degree must be between 1 and 9, got {0}")]
    BadDegree(usize),
    #[error("rank {got} is outside the supported range ({needed})")]
    BadRank { got: usize, needed: &'static str },
    #[error("vector is not a root (self-intersection -2, orthogonal to the canonical class)")]
    NotARoot,
    #[error("Weyl group for r = {0} is refused for full enumeration")]
    TooLargeForEnumeration(usize),
    #[error("operation requires degree {expected}, got {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("action does not preserve the intersection form and the canonical class")]
    ActionDoesNotPreserveForm,
    #[error("Galois action is not transitive on the roots of factor {factor}")]
    NotTransitive { factor: usize },
    #[error("total degree {0} is odd; the conic bundle model needs an even total degree")]
    OddDegree(usize),
    #[error("sigma is inconsistent: {0}")]
    InconsistentSigma(String),
    #[error("unknown factor id {0}")]
    BadFactorId(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no qualifying orbit witness found: {0}")]
    WitnessNotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
