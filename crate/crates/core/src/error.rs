use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// More sites or disorder outcomes than the exact engines can enumerate.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Operation not defined for the given distribution or model kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),
}
