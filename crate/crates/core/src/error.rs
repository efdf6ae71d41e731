//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient track: need at least 2 samples, got {0}")]
    InsufficientTrack(usize),
    #[error("unordered track: timestamps must be strictly increasing (player {player}, t {t})")]
    UnorderedTrack { player: String, t: f64 },
    #[error("undefined orientation: zero-length movement vector")]
    UndefinedOrientation,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degenerate dimension {dim}: zero variance, Scott bandwidth undefined")]
    DegenerateDimension { dim: usize },
    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),
    #[error("cannot weight one-sided data: both commitment partitions must be non-empty")]
    OneSidedData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid specs do not match")]
    GridSpecMismatch,
    #[error("empty window: grid would contain no cells")]
    EmptyWindow,
    #[error("undefined correlation: input vector is constant")]
    UndefinedCorrelation,
    #[error("off-pitch reception at ({x:.2}, {y:.2})")]
    OffPitchReception { x: f64, y: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite value in input data")]
    NonFiniteData,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("snapshot invalid: {0}")]
    InvalidSnapshot(String),
    #[error("synthesis failed: {0}")]
    Synth(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
