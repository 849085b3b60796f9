//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any part of the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not a RIFF/WAVE file: {0}")]
    NotWav(String),

    #[error("malformed WAV header: {0}")]
    MalformedWav(String),

    #[error("unsupported WAV encoding: {0} (only 16-bit PCM is supported)")]
    UnsupportedWavEncoding(String),

    #[error("invalid STFT geometry: {0}")]
    InvalidGeometry(String),

    #[error("ISTFT requires hop = frame_len/2 or frame_len/4, got frame_len {frame_len}, hop {hop}")]
    NonColaGeometry { frame_len: usize, hop: usize },

    #[error("invalid frequency range: {0}")]
    InvalidFrequencyRange(String),

    #[error("watermark band maps to {got} FFT bins, need at least {need}")]
    BandTooNarrow { got: usize, need: usize },

    #[error("clip too short: {got} frames, need {need} for one payload repetition")]
    ClipTooShort { got: usize, need: usize },

    #[error("invalid payload hex: {0}")]
    InvalidPayloadHex(String),

    #[error("invalid strength grid: {0}")]
    InvalidGrid(String),

    #[error("stretch factor {0} outside [0.5, 2.0]")]
    FactorOutOfRange(f64),

    #[error("noise is silent (rms <= 1e-8)")]
    SilentNoise,

    #[error("sample rate mismatch: {a} vs {b}")]
    SampleRateMismatch { a: u32, b: u32 },

    #[error("split '{0}' has no entries")]
    EmptySplit(String),

    #[error("need at least {need} paths to split, got {got}")]
    TooFewPaths { need: usize, got: usize },

    #[error("group '{0}' ({1} records) is larger than the biggest split")]
    GroupTooLarge(String, usize),

    #[error("scores for class '{0}' are empty")]
    EmptyScores(&'static str),

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("non-finite loss at step {step}: {detail}")]
    NonFiniteLoss { step: u64, detail: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("malformed manifest line {line}: {detail}")]
    MalformedManifest { line: usize, detail: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
