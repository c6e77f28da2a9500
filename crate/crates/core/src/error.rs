use std::path::PathBuf;

use crate::analytics::Separation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid stream: {0}")]
    InvalidStream(String),

    #[error("no AoI available for assignment")]
    NoAoi,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Separation(Separation),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("session `{0}` not found")]
    SessionNotFound(String),

    #[error("user `{0}` already joined")]
    DuplicateUser(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("session is closed")]
    SessionClosed,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image decoding failed: {0}")]
    Image(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable code used in wire `error` messages.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::InvalidStream(_) => "invalid_stream",
            Error::NoAoi => "no_aoi",
            Error::InvalidData(_) => "invalid_data",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Separation(_) => "separation",
            Error::Parse { .. } => "parse",
            Error::Protocol(_) => "protocol",
            Error::SessionNotFound(_) => "session_not_found",
            Error::DuplicateUser(_) => "duplicate_user",
            Error::UnknownUser(_) => "unknown_user",
            Error::SessionClosed => "session_closed",
            Error::Io { .. } => "io",
            Error::Image(_) => "image",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
