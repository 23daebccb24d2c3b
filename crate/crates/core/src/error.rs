use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge on a {order}x{order} matrix")]
    EigenConvergence { order: usize },

    #[error("non-finite value {value} from {what} at x = {x}")]
    NonFinite { what: String, x: f64, value: f64 },

    #[error("refusing to export a non-violated record")]
    NotViolated,

    #[error("replay mismatch: recorded {recorded}, replayed {replayed}")]
    ReplayMismatch { recorded: f64, replayed: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
