use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mass matrix is singular (det = {det:e})")]
    SingularMassMatrix { det: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("Tustin transform is singular: continuous pole at s = 2*fs (den(2fs) = {value:e})")]
    TustinSingularity { value: f64 },

    #[error("root finder did not converge after {iterations} iterations (best residual {residual:e})")]
    RootsNotConverged { iterations: usize, residual: f64 },

    #[error("non-finite control action {0}")]
    NonFiniteControl(f64),

    #[error("plant state became non-finite")]
    NonFiniteState,

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("simulation aborted at t = {t}: {source}")]
    Aborted {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
