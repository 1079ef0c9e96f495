use std::path::PathBuf;

use thiserror::Error;

use crate::signal::Domain;

pub type Result<T> = std::result::Result<T, QimError>;

#[derive(Debug, Error)]
pub enum QimError {
    #[error("invalid sample at index {index}: {value}")]
    InvalidSample { index: usize, value: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(&'static str),

    #[error("message of {bits} bits x {samples_per_bit} samples/bit needs {needed} samples, host has {available}")]
    CapacityExceeded {
        bits: usize,
        samples_per_bit: usize,
        needed: usize,
        available: usize,
    },

    #[error("received buffer holds {available} samples, message needs {needed}")]
    TruncatedMessage { needed: usize, available: usize },

    #[error("expected {expected:?} samples, got {actual:?}")]
    DomainMismatch { expected: Domain, actual: Domain },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("alpha is undefined when both distortion and noise power are zero")]
    UndefinedAlpha,

    #[error("non-positive host power {0}")]
    InvalidHostPower(f64),

    #[error("zero-power host signal")]
    ZeroPowerHost,

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("signal of {len} samples is shorter than nfft = {nfft}")]
    SignalTooShort { len: usize, nfft: usize },

    #[error("malformed capture {path}: {reason}")]
    MalformedCapture { path: PathBuf, reason: String },

    #[error("unsupported capture format: {0}")]
    UnsupportedFormat(String),

    #[error("missing sidecar {0}")]
    MissingSidecar(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
