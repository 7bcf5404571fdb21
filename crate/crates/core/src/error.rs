use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p = {0} is not prime")]
    NotPrime(u64),

    #[error("p = {0} is outside the supported range 2 <= p < 2^32")]
    PrimeOutOfRange(u64),

    #[error("field context mismatch: p = {left} vs p = {right}")]
    ContextMismatch { left: u32, right: u32 },

    #[error("cannot parse p-adic scalar {input:?}: {reason}")]
    ParseScalar { input: String, reason: String },

    #[error("invalid wavelet index: {0}")]
    InvalidIndex(String),

    #[error("cells {first} and {second} of a locally constant function overlap")]
    OverlappingCells { first: usize, second: usize },

    #[error("refinement needs {required} cells, above the cap of {cap}")]
    CellCapExceeded { required: u128, cap: u128 },

    #[error("truncation r_max = {r_max} is below the series start {start}")]
    TruncationBelowStart { r_max: i64, start: i64 },

    #[error("spectral parameter must be positive, got {0}")]
    NonPositiveSpectralParameter(f64),

    #[error("projected plane-wave amplitude vanishes (norm {0:e})")]
    VanishingProjection(f64),

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
