use thiserror::Error;

/// Errors produced anywhere in the segmentation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hand matrix {hand} has {rows} rows, expected {expected}")]
    Dimension {
        hand: usize,
        rows: usize,
        expected: usize,
    },

    #[error("non-finite coordinate at hand {hand}, keypoint {row}, axis {col}")]
    NonFinite {
        hand: usize,
        row: usize,
        col: usize,
    },

    #[error("invalid probability vector: {0}")]
    Simplex(String),

    #[error("clip has no frames")]
    EmptyClip,

    #[error("clip list is empty")]
    EmptyList,

    #[error("adjacent clips {index} and {} share label {label}", index + 1)]
    AdjacentDuplicateLabel { index: usize, label: usize },

    #[error("hand count mismatch: expected {expected}, got {got}")]
    HandCountMismatch { expected: usize, got: usize },

    #[error("class {label} has {count} clips, need at least {required}")]
    InsufficientSamples {
        label: usize,
        count: usize,
        required: usize,
    },

    #[error("window [{start}, {start}+{window}) out of range for stream of length {len}")]
    OutOfRange {
        start: usize,
        window: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("class {label} missing from training set")]
    EmptyClass { label: usize },

    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    Divergence { epoch: usize },

    #[error("stream of {len} frames is shorter than window size {window}")]
    StreamTooShort { len: usize, window: usize },

    #[error("test set is empty")]
    EmptySet,

    #[error("no accepted window in event list")]
    NoAccept,

    #[error("stream carries no ground-truth segments")]
    MissingGroundTruth,

    #[error("could not separate class prototypes by the required margin after {attempts} attempts")]
    SeparationFailure { attempts: usize },

    #[error("class {label} has no held-out clip for continuous stream construction")]
    InsufficientHeldOut { label: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported model format version {got} (expected {expected})")]
    Version { got: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
