use thiserror::Error;

/// Crate-wide error type. Every failure path maps onto one variant so the
/// CLI can report a stable machine-parseable code next to the diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("corpus line {line}: {message}")]
    CorpusLine { line: usize, message: String },

    #[error("checkpoint version mismatch: {0}")]
    CheckpointVersion(String),

    #[error("checkpoint truncated: {0}")]
    CheckpointTruncated(String),

    #[error("checkpoint shape mismatch: {0}")]
    CheckpointShape(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("training aborted: {0}")]
    Train(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short code for CLI diagnostics and scripted consumers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Shape(_) => "E_SHAPE",
            Error::InvalidArg(_) => "E_ARG",
            Error::NonFinite(_) => "E_NONFINITE",
            Error::Corpus(_) | Error::CorpusLine { .. } => "E_CORPUS",
            Error::CheckpointVersion(_) => "E_CKPT_VERSION",
            Error::CheckpointTruncated(_) => "E_CKPT_TRUNCATED",
            Error::CheckpointShape(_) => "E_CKPT_SHAPE",
            Error::Checkpoint(_) => "E_CKPT",
            Error::Config(_) => "E_CONFIG",
            Error::Train(_) => "E_TRAIN",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
