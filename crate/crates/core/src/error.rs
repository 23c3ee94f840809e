use thiserror::Error;

/// Errors raised across the library. Variants carry enough context to be
/// reported by the CLI without further wrapping.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("ellipticity violated at cell {cell}: eigenvalue {eigenvalue} below floor {floor}")]
    EllipticityViolation {
        cell: usize,
        eigenvalue: f64,
        floor: f64,
    },

    #[error("cross coefficient at cell {cell} too large for the mixed stencil: |a12| = {a12} ≥ min(a11, a22) = {limit}")]
    AnisotropyTooStrong { cell: usize, a12: f64, limit: f64 },

    #[error("non-finite value at cell {cell}: {detail}")]
    NonFinite { cell: usize, detail: String },

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("field is not a discrete gradient: Cauchy defect {defect:.3e} exceeds {tolerance:.1e}")]
    IncompatibleField { defect: f64, tolerance: f64 },

    #[error("need at least {needed} radii, got {got}")]
    InsufficientRadii { needed: usize, got: usize },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("sampled domain too small: {0}")]
    DomainTooSmall(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("resolution mismatch: {0}")]
    ResolutionMismatch(String),

    #[error("resolution insufficient: {cells_per_period:.2} cells per fast period (need {required})")]
    ResolutionInsufficient { cells_per_period: f64, required: usize },

    #[error("truncation unstable: R and R/2 solves differ by {relative_difference:.3e} on the inner window")]
    TruncationUnstable { relative_difference: f64 },

    #[error("fixed-point iteration not contracting (ratios {ratios:?})")]
    NotContracting { ratios: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
