use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("algebra is not simple: center has dimension {center_dim}, linear dimension {lin_dim}")]
    NotSimple { center_dim: usize, lin_dim: usize },
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("out of window: {0}")]
    OutOfWindow(String),
    #[error("margin too small: {0}")]
    MarginTooSmall(String),
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("operator is not in the gauge-even chain algebra: {0}")]
    NotInAlgebra(String),
    #[error("element is not in the requested span (residual {residual:.3e})")]
    NotInSpan { residual: f64 },
    #[error("dimension law violated for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid dynamics parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("bad lambda vector: {0}")]
    BadLambdas(String),
    #[error("events do not commute (commutator norm {0:.3e})")]
    NotCommuting(f64),
    #[error("events do not have normalized trace 1/2 or are not trace-independent (state trace {0:.6})")]
    WrongTrace(f64),
    #[error("not a projection: {0}")]
    NotProjection(String),
    #[error("not a partition of unity: {0}")]
    InvalidPartition(String),
    #[error("conditioning event has vanishing probability ({0:.3e})")]
    ZeroConditioner(f64),

    #[error("state is not faithful on the relevant algebra (smallest eigenvalue {0:.3e})")]
    NotFaithful(f64),
    #[error("events are not correlated (covariance {0:.3e})")]
    NotCorrelated(f64),
    #[error("degenerate event: {0}")]
    DegenerateEvent(String),
    #[error("bracket failure: {0}")]
    BracketFailure(String),
    #[error("regions are not spacelike separated")]
    NotSpacelike,
    #[error("region selection failed: {0}")]
    RegionSelectionFailure(String),
    #[error("only scalars commute with both events; no nontrivial commuting candidate exists in the target algebra")]
    EmptyCommutant,

    #[error("Fock truncation too small: {0} levels (need at least 4)")]
    TruncationTooSmall(usize),
}
