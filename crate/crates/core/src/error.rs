//! Error type shared by samplers, estimators and the CLI.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    /// The expected number of grains hitting the window is infinite.
    ///
    /// For ellipse grains this is the regime `alpha <= 1` (infinite mean
    /// semi-major axis); for disk grains it is `alpha <= 2`. The exact hit
    /// sampler refuses to run here; use the truncated sampler instead.
    #[error("infinite hitting intensity: {reason}")]
    InfiniteIntensity { reason: String },

    /// A rejection sampler fell below its configured acceptance floor.
    #[error("rejection sampler stalled in {stage}: {attempts} attempts without acceptance")]
    RejectionStall { stage: &'static str, attempts: u64 },

    /// A precondition on user-supplied values was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its interval cap before reaching tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureCap(String),

    /// A raster or table would exceed the configured memory budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invalid event name: {0}")]
    UnknownEvent(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl ModelError {
    pub fn domain(msg: impl Into<String>) -> Self {
        ModelError::Domain(msg.into())
    }

    /// Exit code the CLI maps this error to (2 validation, 3 runtime).
    pub fn exit_code(&self) -> i32 {
        match self {
            ModelError::Domain(_) | ModelError::UnknownEvent(_) => 2,
            _ => 3,
        }
    }
}
