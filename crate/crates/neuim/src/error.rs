//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The per-axis inductance matrix is numerically singular, which can only
    /// happen with corrupt machine parameters.
    #[error("singular inductance matrix (determinant {det:.3e})")]
    SingularInductance { det: f64 },

    #[error("invalid machine parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The integrator produced a non-finite state, usually a sign that the
    /// step size is too large for the machine's time constants.
    #[error("non-finite state at step {step} (t = {t:.6} s); reduce dt")]
    NonFiniteState { step: usize, t: f64 },

    #[error("non-finite loss at epoch {epoch}; check learning rate and normalization")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid network shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory {index} carries no supervised targets")]
    MissingTargets { index: usize },

    #[error("unknown dataset preset '{0}' (expected paper-train, paper-test or free-accel)")]
    UnknownPreset(String),

    #[error("csv format error in {path}: {reason}")]
    CsvFormat { path: String, reason: String },

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("unsupported model format version {found} (supported: {supported})")]
    ModelVersion { found: u32, supported: u32 },

    /// A model trained on one grid spacing cannot be evaluated on another.
    #[error("grid mismatch: model trained at dt = {model_dt:.6e}, dataset has dt = {data_dt:.6e}")]
    GridMismatch { model_dt: f64, data_dt: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
