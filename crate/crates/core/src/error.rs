use std::path::PathBuf;

use thiserror::Error;

/// Every failure the engine can report. Variants map onto the CLI exit
/// codes through [`GcsError::exit_code`].
#[derive(Debug, Error)]
pub enum GcsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("state is not normalized (norm = {norm:.3e})")]
    NotNormalized { norm: f64 },

    #[error("grid coverage: {0}")]
    Coverage(String),

    #[error("classical trajectory escaped the allowed region at step {step} (Q = {q:.6e})")]
    Escape { step: usize, q: f64 },

    #[error("phase unwrap ambiguity at index {index} (x = {x:.6e}, jump = {jump:.3e} rad)")]
    PhaseUnwrap { index: usize, x: f64, jump: f64 },

    #[error("density has an interior node at x = {x:.6e}")]
    Node { x: f64 },

    #[error("linear-coefficient extraction failed: {0}")]
    Extraction(String),

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("unitarity alarm at t = {t:.6e}: norm drift {drift:.3e} exceeds {limit:.1e}")]
    Unitarity { t: f64, drift: f64, limit: f64 },

    #[error("diagnostics inconsistency: {0}")]
    Diagnostics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GcsError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GcsError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            GcsError::Config(_) | GcsError::InvalidModel(_) | GcsError::NotImplemented(_) => 2,
            GcsError::InvalidGrid(_) => 2,
            GcsError::Coverage(_) | GcsError::Escape { .. } => 3,
            GcsError::Unitarity { .. } => 4,
            GcsError::Extraction(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, GcsError>;
