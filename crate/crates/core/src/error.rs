use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite argument {0} passed to Bessel function")]
    NonFiniteArgument(f64),

    #[error("dither amplitude a{index} is zero, demodulation is undefined")]
    ZeroAmplitude { index: usize },

    #[error("time {t} precedes the last event at {last}")]
    NonMonotoneTime { t: f64, last: f64 },

    #[error("closed-loop matrix is not Hurwitz (largest real part {max_re:e})")]
    NotHurwitz { max_re: f64 },

    #[error("weight matrix Q must be symmetric positive definite")]
    NotPositiveDefinite,

    #[error("singular linear system in {context}")]
    Singular { context: &'static str },

    #[error("Lyapunov residual {residual:e} exceeds {limit:e}")]
    Residual { residual: f64, limit: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("trace grids differ: {reason}")]
    GridMismatch { reason: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed trace: {reason}")]
    MalformedTrace { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    /// Process exit code: 1 for validation problems, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteState { .. } | Error::Singular { .. } | Error::Residual { .. } => 2,
            _ => 1,
        }
    }
}

/// Scenario file problems, each carrying `section.key` context.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("missing key {section}.{key}")]
    MissingKey { section: String, key: String },

    #[error("{section}.{key}: expected {expected}")]
    TypeMismatch { section: String, key: String, expected: &'static str },

    #[error("{section}.{key}: {reason}")]
    Invalid { section: String, key: String, reason: String },

    #[error(
        "dithers: omega1 = {omega1}, omega2 = {omega2} must both equal 2*omega3 = {} \
         (set dithers.frequency_override = true to relax)",
        2.0 * omega3
    )]
    FrequencyRatio { omega1: f64, omega2: f64, omega3: f64 },
}
