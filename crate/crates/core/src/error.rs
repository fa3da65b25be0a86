//! Error types shared across the pipeline.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between a WAV file and an evaluation report.
#[derive(Debug, Error)]
pub enum Error {
    /// RIFF/WAVE structure is broken (bad header, truncated chunk, ...).
    #[error("malformed WAV: {0}")]
    MalformedWav(String),

    /// The WAV is structurally valid but uses a codec we do not decode.
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),

    /// Recording is not at the target rate and resampling is disabled.
    #[error("sample rate {found} Hz differs from required {required} Hz (resampling disabled)")]
    RateMismatch { found: u32, required: u32 },

    /// Tensor/matrix dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// An operation that needs data received none.
    #[error("empty dataset")]
    EmptyDataset,

    /// Class id out of range for the declared number of classes.
    #[error("invalid class {class} (have {n_classes} classes)")]
    InvalidClass { class: usize, n_classes: usize },

    /// Paired slices of different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Confusion matrix with no observations.
    #[error("empty confusion matrix")]
    EmptyMatrix,

    /// Query/feature dimension differs from what the model was fit on.
    #[error("dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Predict called on a model with no training data.
    #[error("model holds no training data")]
    EmptyModel,

    /// Training labels contain fewer than two classes.
    #[error("training data contains a single class")]
    SingleClass,

    /// Pruning requested with an empty validation slice.
    #[error("empty validation set")]
    EmptyValidation,

    /// Bad run/training configuration.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    /// Artifact written by a newer format revision.
    #[error("{artifact} format version {found} is newer than supported {supported}")]
    VersionMismatch {
        artifact: &'static str,
        found: u32,
        supported: u32,
    },

    /// Artifact failed magic or checksum validation.
    #[error("corrupt {artifact}: {reason}")]
    Corrupt {
        artifact: &'static str,
        reason: String,
    },

    /// Manifest rows that cannot be interpreted.
    #[error("bad manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
