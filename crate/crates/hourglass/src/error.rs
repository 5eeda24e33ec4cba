use thiserror::Error;

/// Errors produced by the physics engines and the configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mode {label} is not guided at radius {radius_nm} nm (no dispersion root)")]
    ModeNotGuided { label: String, radius_nm: f64 },

    #[error("no cavity resonance found in [{lo_nm}, {hi_nm}] nm")]
    ResonanceNotFound { lo_nm: f64, hi_nm: f64 },

    #[error("master-equation integration failed: {0}")]
    IntegrationFailure(String),

    #[error("indistinguishability undefined: no cavity emission")]
    UndefinedEta,

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("numeric overflow in {0}")]
    NumericOverflow(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
