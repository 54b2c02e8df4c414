use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PFM: {0}")]
    MalformedPfm(String),
    #[error("truncated PFM payload: expected {expected} bytes, found {found}")]
    TruncatedPfm { expected: usize, found: usize },
    #[error("non-finite value at sample {0}")]
    NonFinite(usize),
    #[error("png: {0}")]
    Png(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("image has no pixel with positive luminance")]
    NoPositiveLuminance,
    #[error("camera is inside scene geometry")]
    CameraInsideGeometry,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
