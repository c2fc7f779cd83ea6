//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered in {context} (invalid design or parameters)")]
    NonFinite { context: &'static str },

    #[error("quantization noise at RRH {rrh} must be positive")]
    NonPositiveQuantNoise { rrh: usize },

    #[error("beamformer of user {user} is orthogonal to its channel; the SINR coupling system is undefined for this user")]
    OrthogonalBeamformer { user: usize },

    #[error("user {user} has a zero channel but a positive rate target")]
    ZeroChannel { user: usize },

    #[error("RRH {rrh} carries no beamformed signal but has positive quantization noise; no exact dual exists")]
    DegenerateRrh { rrh: usize },

    #[error("spectral radius iteration did not converge for a {size}x{size} matrix after {iterations} iterations")]
    SpectralRadiusNoConvergence { size: usize, iterations: usize },

    #[error("coupling system is not contractive (spectral radius {rho}); input design is inconsistent")]
    CouplingNotContractive { rho: f64 },

    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("failed to parse scenario {path}: {message}")]
    ScenarioSyntax { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
