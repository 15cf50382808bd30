use std::path::PathBuf;

use crate::TokenId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid UTF-8{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    InvalidUtf8 { line: Option<usize> },

    #[error("unknown token id {0}")]
    UnknownTokenId(TokenId),

    #[error("decoded bytes are not valid UTF-8 (valid up to byte {valid_up_to})")]
    InvalidByteSequence { valid_up_to: usize },

    #[error("vocabulary is missing the byte-level token for byte {0:#04x}")]
    MissingByteToken(u8),

    #[error("malformed vocabulary: {0}")]
    MalformedVocab(String),

    #[error("malformed merges at line {line}: {reason}")]
    MalformedMerges { line: usize, reason: String },

    #[error("invalid merge table: {0}")]
    InvalidMerge(String),

    #[error("extension for `{language}` was trained against base {found}, expected {expected}")]
    FingerprintMismatch {
        language: String,
        expected: String,
        found: String,
    },

    #[error("special token `{0}` is already defined")]
    DuplicateSpecialName(String),

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("unsupported task `{0}`, only transcribe is available")]
    UnsupportedTask(String),

    #[error("vocabulary has no special token `{0}`")]
    MissingSpecialToken(String),

    #[error("non-finite value in decoder input")]
    NonFiniteInput,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {required} distinct sample sizes with >= {min_runs} runs each, got {distinct}")]
    InsufficientSamples {
        distinct: usize,
        required: usize,
        min_runs: usize,
    },

    #[error("invalid token counts: n_base={n_base}, n_ext={n_ext} (need n_base >= n_ext >= 1)")]
    InvalidTokenCounts { n_base: usize, n_ext: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("language `{language}`: {source}")]
    Language {
        language: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::InvalidUtf8 { .. } => 3,
            Error::FingerprintMismatch { .. } => 4,
            Error::UnknownLanguage(_) => 5,
            Error::InsufficientSamples { .. } => 6,
            Error::Language { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
