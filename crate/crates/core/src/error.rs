use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { expected: u8, found: u8 },

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample {sample} has no labels")]
    EmptyLabelColumn { sample: usize },

    #[error("duplicate sample id {0}")]
    DuplicateId(u64),

    #[error("class {class} has no training samples")]
    EmptyClass { class: usize },

    #[error("class {class} has {available} samples, needs {needed}")]
    InsufficientClassSamples {
        class: usize,
        needed: usize,
        available: usize,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl Error {
    /// Process exit code for the CLI: configuration, i/o, file-format,
    /// data-invariant and training failures each get their own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 2,
            Error::Io(_) => 3,
            Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::Truncated(_)
            | Error::Parse(_) => 4,
            Error::DimensionMismatch(_)
            | Error::EmptyLabelColumn { .. }
            | Error::DuplicateId(_)
            | Error::InsufficientClassSamples { .. }
            | Error::IndexOutOfRange { .. } => 5,
            Error::EmptyClass { .. } | Error::NonFinite(_) => 6,
        }
    }

    /// Stable machine-readable kind tag, used by the CLI's error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::BadMagic { .. } => "bad_magic",
            Error::UnsupportedVersion { .. } => "unsupported_version",
            Error::Truncated(_) => "truncated",
            Error::Parse(_) => "parse",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::EmptyLabelColumn { .. } => "empty_label_column",
            Error::DuplicateId(_) => "duplicate_id",
            Error::EmptyClass { .. } => "empty_class",
            Error::InsufficientClassSamples { .. } => "insufficient_class_samples",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NonFinite(_) => "non_finite",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
