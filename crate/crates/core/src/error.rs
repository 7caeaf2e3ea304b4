use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("function is not real-valued (max asymmetry {0:e})")]
    NotReal(f64),

    #[error("running integral is not periodic: mean of b is {0:e}")]
    NonzeroMean(f64),

    #[error("domain too small: boundary value {boundary:e} exceeds {limit:e}")]
    DomainTooSmall { boundary: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("resonant: use solve_resonant (theta_0 = {0})")]
    Resonant(num_complex::Complex64),

    #[error("not resonant (theta_0 = {0})")]
    NotResonant(num_complex::Complex64),

    #[error("compatibility defect {defect:e} above tolerance {tol:e}")]
    IncompatibleRhs { defect: f64, tol: f64 },

    #[error("compatibility defects above tolerance at xi = {xis:?}")]
    IncompatibleAt { xis: Vec<f64> },

    #[error("symbol zero set is nonempty")]
    ZeroSetNonempty,

    #[error("operator is not globally solvable: {0}")]
    NotSolvable(String),

    #[error("solvability undetermined for this operator (use force to attempt)")]
    Undetermined,

    #[error("near-resonant frequency xi = {xi} (condition factor {factor:e})")]
    NearResonant { xi: f64, factor: f64 },

    #[error("witness precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
