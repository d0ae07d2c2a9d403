use thiserror::Error;

use crate::special_fn::SpecialFnError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(
        "degenerate superposition: 1 + α² + 2α·overlap·cosθ = {inverse_norm_sq:e}, the state has zero norm"
    )]
    DegenerateSuperposition { inverse_norm_sq: f64 },
    #[error("time t = {t} is not allowed: {reason}")]
    NegativeTime { t: f64, reason: &'static str },
    #[error("probability {value} at t = {t} is outside [0, 1] beyond rounding")]
    ProbabilityOutOfRange { value: f64, t: f64 },
    #[error("the wave function under a constant force is not modelled; use the probability or current")]
    ForcedWaveFunction,
    #[error("{what} did not converge after {iterations} iterations: {detail}")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        detail: String,
    },
    #[error("eigenvalue {lambda} violates the bound |λ| ≤ 1; the discretization is unreliable")]
    SpectrumOutOfBounds { lambda: f64 },
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
