use thiserror::Error;

/// Errors produced by model construction, classification and estimators.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("(alpha, beta) = ({alpha}, {beta}) outside the admissible set")]
    Inadmissible { alpha: f64, beta: f64 },

    #[error("boundary evaluation out of range: t = {t}, max = {max}")]
    BoundaryOutOfRange { t: u64, max: u64 },

    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("degenerate model: truncated second moment never drops below {threshold}")]
    NormingFailed { threshold: f64 },

    #[error("censoring fraction {fraction} exceeds limit {limit}")]
    ExcessiveCensoring { fraction: f64, limit: f64 },

    #[error("non-monotone input: {0}")]
    NonMonotone(String),

    #[error("ladder-height mass does not decay below tol {tol}: residual {residual} after {steps} steps")]
    MassNotDecaying {
        tol: f64,
        residual: f64,
        steps: u64,
    },

    #[error("renewal function extrapolated over more than one decade: x = {x}, grid max = {grid_max}")]
    ExtrapolationTooFar { x: f64, grid_max: f64 },

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("lattice model required: {0}")]
    LatticeRequired(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
