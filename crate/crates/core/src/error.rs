use thiserror::Error;

/// Errors raised by the analytic, backoff, simulation and PHY routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on an input parameter does not hold. The message names
    /// the violated condition, e.g. `"r > 1"`.
    #[error("invalid parameter {name} = {value}: requires {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        requirement: &'static str,
    },

    #[error("no steady state: r * p_c = {product} >= 1")]
    NoSteadyState { product: f64 },

    #[error("matrix is rank deficient (condition number {condition:.3e} exceeds {limit:.1e})")]
    RankDeficient { condition: f64, limit: f64 },

    #[error("search space of {candidates} candidates exceeds the limit of {limit}")]
    SearchTooLarge { candidates: f64, limit: u64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(
        name: &'static str,
        value: impl std::fmt::Display,
        requirement: &'static str,
    ) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            requirement,
        }
    }
}
