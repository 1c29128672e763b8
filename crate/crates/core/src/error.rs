use std::path::PathBuf;

/// Errors produced anywhere in the simulation and reconstruction pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid dimension {0}: must be a power of two and at least 16")]
    InvalidDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "transfer function undersampled: lambda*z/(N*pitch^2) = {ratio:.3} exceeds 1 \
         (distance {distance} m, N = {n}, pitch {pitch} m)"
    )]
    Aliasing {
        distance: f64,
        n: usize,
        pitch: f64,
        ratio: f64,
    },

    #[error("aperture diameter {diameter} m exceeds grid extent {extent} m")]
    ApertureExceedsGrid { diameter: f64, extent: f64 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("unknown object `{0}` (expected Q, double-slit, point or uniform)")]
    UnknownObject(String),

    #[error("invalid optical layout: {0}")]
    Layout(String),

    #[error("detector saturation: expected count {expected:.1} exceeds limit {limit:.1}")]
    Saturation { expected: f64, limit: f64 },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: header declares {declared} frames, file holds {found}")]
    TruncatedPayload { declared: u64, found: u64 },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },

    #[error("trailing data after the last declared frame ({0} bytes)")]
    TrailingData(u64),

    #[error("need at least {needed} frames, have {have}")]
    InsufficientFrames { needed: u64, have: u64 },

    #[error("ROI of {0} pixels exceeds the 16x16 limit")]
    RoiTooLarge(usize),

    #[error("pair correlation requested but no ROI was enabled at initialization")]
    RoiNotEnabled,

    #[error("image is constant; correlation is undefined")]
    ConstantImage,

    #[error("image has zero peak; normalization is undefined")]
    ZeroImage,

    #[error("malformed image file {path}: {reason}")]
    ImageFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
