use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The map (or its derivative) is not defined on the discontinuity line x = 0.
    #[error("undefined at the singular line x = 0")]
    Singularity,

    #[error("{what}: value {value} outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("size guard: {what} = {requested} exceeds the limit {limit}")]
    SizeGuard {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::Domain {
        what,
        value,
        range: range.into(),
    }
}
