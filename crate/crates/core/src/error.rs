use std::path::PathBuf;

/// Errors raised by the encoders, decoders and dataset utilities.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned calibration: {what} = {value:e} (epsilon too small)")]
    IllConditioned { what: &'static str, value: f64 },

    #[error("key domain of size {d} exceeds the capacity limit of {cap}")]
    Capacity { d: usize, cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
