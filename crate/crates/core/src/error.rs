use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no precomputed offsets for mod_orders {mod_orders:?}, alpha {alpha:?} (resolution {resolution})")]
    NotPrecomputed {
        mod_orders: Vec<u32>,
        alpha: Vec<f64>,
        resolution: u32,
    },

    #[error("SER bound unavailable: {0}")]
    BoundUnavailable(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
