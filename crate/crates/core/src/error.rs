use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rejection sampling failed: could not place {wanted} distinct frequencies after {attempts} attempts")]
    RejectionSampling { wanted: usize, attempts: usize },

    #[error("window with {psr_db} dB PSR is unattainable at length {length}: {reason}")]
    UnattainablePsr {
        length: usize,
        psr_db: f64,
        reason: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
