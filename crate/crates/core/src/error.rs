use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid analyzer cap: {0}")]
    InvalidCap(String),

    #[error("unknown model identifier `{0}`")]
    UnknownModel(String),

    #[error("event stream for side {side} is not time-sorted at record {index}")]
    UnsortedStream { side: char, index: usize },

    #[error("no coincidences: correlation estimate is empty")]
    EmptyEstimate,

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("binary sequence must contain both symbols")]
    DegenerateSequence,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("series too short for a periodogram: {len} < 8")]
    TooShort { len: usize },

    #[error("series carries no timestamps")]
    MissingTimestamps,

    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
