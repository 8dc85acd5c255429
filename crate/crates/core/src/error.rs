use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("channel at energy {energy} is closed (energy <= 0)")]
    ClosedChannel { energy: f64 },

    #[error("singular matching system (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },

    #[error("formula is singular at {0}")]
    Singularity(String),

    #[error("Bessel evaluation out of range: {0}")]
    BesselRange(String),

    #[error("norm drift {drift:e} exceeds stability limit {limit:e}")]
    Unstable { drift: f64, limit: f64 },

    #[error("grid geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
