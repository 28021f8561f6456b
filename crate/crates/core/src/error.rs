use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid coefficient entry: {0}")]
    InvalidCoefficient(String),

    #[error("assembled quadratic form is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("field is not Hermitian: imaginary residual {residual:e} exceeds {tolerance:e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("time grid is not strictly increasing at index {0}")]
    GridNotIncreasing(usize),

    #[error("mode truncation mismatch: expected N = {expected}, found N = {found}")]
    TruncationMismatch { expected: usize, found: usize },

    #[error("noise count mismatch: coefficients carry {expected} Wiener processes, forcing carries {found}")]
    NoiseCountMismatch { expected: usize, found: usize },

    #[error("time {0} is not on the ensemble grid")]
    TimeNotOnGrid(f64),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("region needs at least two grid points")]
    RegionTooSmall,

    #[error("series truncation N = {truncation} leaves a tail bound {tail:e} above the tolerance {tolerance:e}")]
    TruncationTooSmall {
        truncation: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("free terms f and g vanish on the region; the solution is identically zero, check it directly instead of forming a ratio")]
    ZeroForcing,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
