use thiserror::Error;

/// Errors raised by the operator, channel and supermap routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("not a conditional probability table: {0}")]
    NotStochastic(String),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("channel is not bistochastic (deviation {0:.3e})")]
    NotBistochastic(f64),

    #[error(
        "projection onto the bistochastic span is not completely positive (min eigenvalue {0:.3e})"
    )]
    NonPositiveProjection(f64),

    #[error("promise violated: pair is in neither S+ nor S-")]
    PromiseViolated,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
