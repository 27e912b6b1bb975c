use thiserror::Error;

/// Errors surfaced by the simulation and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("H-gradient is degenerate (|D_H G|_H = {norm:.3e} below threshold {threshold:.3e})")]
    DegenerateGradient { norm: f64, threshold: f64 },

    /// Closure projection failed to converge; carries the offending state so
    /// the caller can shrink the step size and retry.
    #[error("projection did not converge after {iters} iterations (G = {g_value:.3e} at {state:?}{})",
            step.map(|s| format!(", step {s}")).unwrap_or_default())]
    ProjectionDiverged {
        iters: usize,
        g_value: f64,
        state: Vec<f64>,
        step: Option<usize>,
    },

    #[error("unsupported geometry for this operation: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("rejection sampler acceptance rate {rate:.3e} below 1e-3; choose a domain with larger Gaussian mass")]
    LowAcceptance { rate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
