//! Error type shared by the simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice window must have at least 3 sites, got {0}")]
    WindowTooSmall(usize),

    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{context}[{index}] = {value} must be strictly positive")]
    NotPositive {
        context: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{context} contains a non-finite entry at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error(
        "metric is not divergence-compatible: rho deviates from its mean by \
         {deviation:.3e} (tolerance {tolerance:.3e})"
    )]
    NotDivergenceCompatible { deviation: f64, tolerance: f64 },

    #[error("radial amplitude must be non-negative and finite, got {0}")]
    InvalidRadius(f64),

    #[error("phase field must have exactly zero imaginary part")]
    ComplexPhase,

    #[error("density has no unique maximum site; peak position is undefined")]
    NoUniquePeak,

    #[error("flat-polar state requires a constant metric on a periodic window")]
    FlatPolarMetric,

    #[error("flat-polar state requires the measure induced by the metric")]
    FlatPolarMeasure,

    #[error("flow diverged at s = {s}: {reason}")]
    Diverged { s: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
