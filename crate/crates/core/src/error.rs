use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trace file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("trace contains no samples")]
    EmptyTrace,

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("history is empty")]
    EmptyHistory,

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("training diverged at epoch {epoch}: non-finite weight")]
    DivergedTraining { epoch: usize },

    #[error("length mismatch: {left} predictions vs {right} actuals")]
    LengthMismatch { left: usize, right: usize },

    #[error("value overflow in field `{field}`: {value} does not fit in {bits} bits")]
    ValueOverflow {
        field: &'static str,
        value: f64,
        bits: u32,
    },

    #[error("truncated packet: needed {needed} bits, got {got}")]
    TruncatedPacket { needed: usize, got: usize },

    #[error("bad packet type tag {0:#04b}")]
    BadTypeTag(u8),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("trace too short: need {needed} samples, trace has {got}")]
    TraceTooShort { needed: usize, got: usize },

    #[error("forecast diverged at round {t}: non-finite stored value")]
    ForecastDiverged { t: usize },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("model document: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
