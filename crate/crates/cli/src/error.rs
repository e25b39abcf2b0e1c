use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed config: syntax, schema or unknown key.
    #[error("config error: {0}")]
    Config(String),
    /// Well-formed config that violates an invariant.
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Invalid(_) => "invalid",
            Self::Estimation(_) => "estimation",
            Self::Io(_) => "io",
            Self::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Invalid(_) | Self::Usage(_) => 2,
            Self::Estimation(_) | Self::Io(_) => 1,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorEnvelope { error: ErrorBody { kind: self.kind(), message: self.to_string() } })
            .expect("error serializes")
    }
}

impl From<varcontrib_core::Error> for CliError {
    fn from(e: varcontrib_core::Error) -> Self {
        match e {
            varcontrib_core::Error::EstimationFailure(m) => Self::Estimation(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
