use alloc::string::String;

/// Errors reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver did not converge (matrix hash {hash:016x})")]
    NoConvergence { hash: u64 },
    #[error("channel is not trace preserving: completeness residual {residual:.3e}")]
    NotCptp { residual: f64 },
    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("operator mixes computational and leakage subspaces: off-block norm {residual:.3e}")]
    MixesSubspaces { residual: f64 },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("transition matrix invariant violated: {0}")]
    TransitionInvariant(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exhaustive enumeration too large: {sequences} sequences")]
    CombinatorialLimit { sequences: u128 },
    #[error("sequence lengths must be uniformly spaced")]
    NonUniformSpacing,
    #[error("too few samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = core::result::Result<T, Error>;
