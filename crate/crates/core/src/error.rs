use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode mismatch: {0:?} vs {1:?}")]
    ModeMismatch(Vec<usize>, Vec<usize>),

    #[error("index {index:?} out of range for modes {modes:?}")]
    IndexOutOfRange { index: Vec<usize>, modes: Vec<usize> },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("factor {0} has zero length")]
    ZeroLengthFactor(usize),

    #[error("dense tensor too large: {n} entries exceeds cap {cap}")]
    DenseTooLarge { n: f64, cap: usize },

    #[error("domain violation in {op}: {detail}")]
    DomainViolation { op: &'static str, detail: String },

    #[error("{op} diverged at iteration {iteration} (non-finite values)")]
    Diverged { op: &'static str, iteration: usize },

    #[error("{op} did not converge within the iteration budget (final step {final_step:.3e})")]
    NotConverged { op: &'static str, final_step: f64 },

    #[error("{op}: entries inside the sign dead band, result ambiguous (residual {residual:.3e})")]
    DeadBand { op: &'static str, residual: f64 },

    #[error("grid: mode size {0} must be even and at least 4")]
    BadGridSize(usize),

    #[error("grid: half-width must be positive, got {0}")]
    BadGridWidth(f64),

    #[error("imaginary residual {residual:.3e} above tolerance {tol:.3e}")]
    ImaginaryResidual { residual: f64, tol: f64 },

    #[error("matrix is rank deficient (pivot {pivot:.3e} at column {col})")]
    RankDeficient { pivot: f64, col: usize },

    #[error("maxvol: matrix has {rows} rows but {cols} columns are requested")]
    MaxvolShape { rows: usize, cols: usize },

    #[error("renormalize: integral is {0}, expected positive")]
    NonPositiveIntegral(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
