use thiserror::Error;

/// Errors produced by the transform, statistic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown wavelet `{0}` (expected one of haar, d4, d6, d8, d10)")]
    UnknownWavelet(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("scale must be at least 1, got {0}")]
    InvalidScale(u32),

    #[error("scale {scale} needs {entries} filter taps, over the budget of {budget}")]
    ScaleTooLarge {
        scale: u32,
        entries: usize,
        budget: usize,
    },

    #[error("series is empty")]
    EmptySeries,

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("series has zero energy")]
    ZeroEnergy,

    #[error("band index {band} out of range for scale {scale}")]
    BandOutOfRange { band: usize, scale: u32 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("non-positive variance for component {index}: {value}")]
    NonPositiveVariance { index: usize, value: f64 },

    #[error("covariance matrix is not positive definite (condition number {condition:.3e})")]
    SingularCovariance { condition: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degrees of freedom must be positive")]
    InvalidDegreesOfFreedom,
}

pub type Result<T> = std::result::Result<T, Error>;
