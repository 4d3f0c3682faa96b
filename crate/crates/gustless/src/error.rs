//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the gustless library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or internally inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An input value violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Audio is too short for the requested framing.
    #[error("audio too short: {got} samples, need at least {need} for one frame")]
    AudioTooShort { got: usize, need: usize },

    /// Two grids (or a grid and a model) disagree on framing metadata.
    #[error("framing mismatch: {0}")]
    FramingMismatch(String),

    /// The requested sub-band contains no energy.
    #[error("silent band: no power in bins [{mu1}, {mu2}]")]
    SilentBand { mu1: usize, mu2: usize },

    /// Model layout does not match the configuration it is used with.
    #[error("model layout mismatch: {0}")]
    ModelMismatch(String),

    /// Training diverged or could not proceed.
    #[error("training failed: {0}")]
    Training(String),

    /// A WAV file could not be parsed.
    #[error("wav error at byte {offset}: {message}")]
    WavFormat { offset: u64, message: String },

    /// Underlying I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A config file could not be parsed.
    #[error("config error at {path}:{line}: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        message: String,
    },

    /// A model file could not be parsed.
    #[error("model file error: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Exit code for the CLI: 2 for configuration errors, 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::ConfigParse { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
