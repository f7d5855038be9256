use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("point outside the domain: {0}")]
    OutsideDomain(&'static str),

    #[error("sampling region is empty: no accepted point after {draws} draws")]
    EmptyRegion { draws: usize },

    #[error("no sign change of the certificate on (1, 2] at eps = {eps}")]
    NoSignChange { eps: f64 },

    #[error("test function support leaks outside the domain")]
    SupportLeak,

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("numerical instability: |u| = {value} exceeds {limit}")]
    Unstable { value: f64, limit: f64 },

    #[error("singular system in {0}")]
    Singular(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter { name, value, reason }
}
