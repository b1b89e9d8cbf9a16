use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An output event that threshold detectors cannot register (a mode with
    /// two or more photons) was requested.
    #[error("unsupported outcome: {0}")]
    UnsupportedOutcome(String),

    /// Both the dip and the distinguishable reference coincidence rate vanish,
    /// so the visibility is 0/0.
    #[error("undefined visibility for inputs ({in_a},{in_b}), outputs ({out_a},{out_b})")]
    UndefinedVisibility {
        in_a: usize,
        in_b: usize,
        out_a: usize,
        out_b: usize,
    },

    /// Fewer constraints than free parameters in a reconstruction.
    #[error("under-determined: {0}")]
    UnderDetermined(String),

    /// A numerical tolerance cannot be met with the requested discretization.
    #[error("precision: {0}")]
    Precision(String),

    /// A declarative configuration failed validation; `field` is the path of
    /// the offending entry.
    #[error("invalid config at `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Stable machine-readable tag for each error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnsupportedOutcome(_) => "unsupported_outcome",
            Error::UndefinedVisibility { .. } => "undefined_visibility",
            Error::UnderDetermined(_) => "under_determined",
            Error::Precision(_) => "precision",
            Error::InvalidConfig { .. } => "invalid_config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
