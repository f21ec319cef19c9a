use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("zero subspace is not a valid input here")]
    ZeroSubspace,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("null-space inclusion N(A) \u{2286} N(B) violated")]
    NullSpaceInclusion,

    #[error("input is not symmetric positive semidefinite: {0}")]
    NotPsd(String),

    #[error("subspaces do not intersect trivially at the working tolerance")]
    NontrivialIntersection,

    #[error("operators are incompatible on M \u{2229} N (residual {residual:.3e})")]
    Incompatible { residual: f64 },

    #[error("family geometry has a closed sum (gap margin bounded below); no adversarial direction exists")]
    ClosedSumGeometry,

    #[error("instance generation failed at n = {n}: {source}")]
    Generation { n: usize, source: Box<Error> },

    #[error("internal consistency check failed: {0}")]
    Defect(String),
}

pub type Result<T> = std::result::Result<T, Error>;
