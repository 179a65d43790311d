use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed to converge within {0} sweeps")]
    NonConvergence(usize),

    #[error("negative eigenvalue {0:.3e} where a positive semi-definite operator is required")]
    NegativeEigenvalue(f64),

    #[error("support violation: supp(rho) is not contained in supp(sigma)")]
    SupportViolation,

    #[error("alpha = {0} is within the guard band around 1; use limits_at_one instead")]
    DegenerateAlpha(f64),

    #[error("instance structure required: {0}")]
    StructureRequired(String),

    #[error("positive definiteness required: {0}")]
    PositiveDefiniteRequired(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown claim id: {0}")]
    UnknownClaim(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
