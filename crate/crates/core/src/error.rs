use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a {expected}-channel image, got {found} channels")]
    Dimension { expected: u8, found: u8 },

    #[error("invalid image geometry: {0}")]
    Geometry(String),

    #[error("unsupported pixel format {0}; only 8-bit gray, gray+alpha, RGB and RGBA inputs are accepted")]
    UnsupportedDepth(String),

    #[error("cannot decode image: {0}")]
    Decode(#[from] image::ImageError),

    #[error("OCR engine `{program}` is not available; pass a pre-computed word dump with --ocr-dump instead")]
    EngineUnavailable { program: String },

    #[error("OCR engine exited with {status}: {stderr}")]
    EngineFailure { status: String, stderr: String },

    #[error("word dump row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("cannot compute the confidence of a line without words")]
    EmptyLine,

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid cascade: {0}")]
    Cascade(String),

    #[error("invalid field grammar: {0}")]
    Grammar(String),

    #[error("inconsistent extraction: {0}")]
    Consistency(String),

    #[error("dataset mismatch: missing predictions for {missing:?}, predictions without gold {extra:?}")]
    Dataset { missing: Vec<String>, extra: Vec<String> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("unknown record {0}")]
    UnknownRecord(String),

    #[error("revision conflict: request was based on revision {requested}, current is {current}")]
    Conflict { requested: u64, current: u64 },

    #[error("record {0} was auto-accepted and cannot be corrected")]
    Terminal(String),

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
