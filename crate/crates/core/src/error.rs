use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error at `{path}`: {message}")]
    ConfigAt { path: String, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("domain contamination: {0}")]
    DomainContamination(String),

    #[error("horizon too large: {0}")]
    HorizonTooLarge(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn config_at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigAt {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::ConfigAt { .. } => "configuration",
            Error::Numeric(_) => "numeric",
            Error::Unsupported(_) => "unsupported",
            Error::Hypothesis(_) => "hypothesis_violation",
            Error::Invariant(_) => "invariant_violation",
            Error::DomainContamination(_) => "domain_contamination",
            Error::HorizonTooLarge(_) => "horizon_too_large",
            Error::UndefinedRatio(_) => "undefined_ratio",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Offending configuration key, when known.
    pub fn path(&self) -> Option<&str> {
        match self {
            Error::ConfigAt { path, .. } => Some(path),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
