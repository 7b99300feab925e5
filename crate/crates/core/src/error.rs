use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal too short: {len} samples, need at least {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("frame length must be a power of two (got {0})")]
    NotPowerOfTwo(usize),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("insufficient leading noise frames: need {needed}, got {available}")]
    InsufficientNoiseFrames { needed: usize, available: usize },

    #[error("invalid band count {bands} for {bins} bins")]
    InvalidBandCount { bands: usize, bins: usize },

    #[error("band frequency {freq_hz} Hz exceeds Nyquist {nyquist_hz} Hz")]
    AboveNyquist { freq_hz: f64, nyquist_hz: f64 },

    #[error("bands do not tile the spectrum: {0}")]
    BandTiling(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed WAV: {0}")]
    MalformedWav(String),

    #[error("unsupported bit depth: {0} (only 16-bit PCM)")]
    UnsupportedBitDepth(u16),

    #[error("unsupported encoding: format tag {0} (only PCM)")]
    UnsupportedEncoding(u16),

    #[error("unsupported channel count: {0} (mono only)")]
    Multichannel(u16),

    #[error("degenerate mix: {0}")]
    DegenerateMix(String),

    #[error("malformed noise profile: {0}")]
    MalformedProfile(String),

    #[error("report: {0}")]
    Report(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
