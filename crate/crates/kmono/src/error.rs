use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid chain family: {0}")]
    InvalidChainFamily(String),

    #[error("unsupported noise model: {0}")]
    UnsupportedNoise(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
