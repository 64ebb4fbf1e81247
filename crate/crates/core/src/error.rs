use thiserror::Error;

/// Errors raised by the simulator and its harness.
#[derive(Debug, Error)]
pub enum VortexError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected N={expected}, L={expected_len}, got N={found}, L={found_len}")]
    GridMismatch {
        expected: usize,
        expected_len: f64,
        found: usize,
        found_len: f64,
    },

    #[error("buffer has {found} values, grid needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("norm exponent q={0} is not supported here")]
    InvalidExponent(f64),

    #[error("vorticity has nonzero mean {0:e}; Biot-Savart is undefined at k=0")]
    NonzeroMean(f64),

    #[error("mode ({0}, {1}) lies outside the grid band")]
    ModeOutOfBand(i64, i64),

    #[error("duplicate noise mode ({0}, {1})")]
    DuplicateMode(i64, i64),

    #[error("Hille-Yosida level must be positive, got {0}")]
    InvalidLevel(i64),

    #[error("increment carries {found} gaussians, covariance has {expected} modes")]
    IncrementMismatch { expected: usize, found: usize },

    #[error("blow-up at t={time}: |v|_L2 = {norm:e} exceeds {threshold:e}")]
    BlowUp { time: f64, norm: f64, threshold: f64 },

    #[error("inconsistent initial data: |curl v0 - xi0| / |xi0| = {0:e}")]
    InconsistentData(f64),

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl VortexError {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        VortexError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        VortexError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, VortexError>;
