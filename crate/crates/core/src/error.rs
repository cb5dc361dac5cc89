use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order s = {0} outside the open interval (0, 1)")]
    InvalidOrder(f64),

    #[error("argument {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain spec parse error: {0}")]
    DomainSpec(String),

    #[error("resolution guard violated: {0}")]
    Resolution(String),

    #[error("non-finite value encountered while evaluating {0}")]
    NonFinite(&'static str),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("eigensolver failed to converge (residual {residual:e}): {detail}")]
    NoConvergence { residual: f64, detail: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("r too small for this k: denominator {denominator:e} is not positive")]
    RadiusTooSmall { denominator: f64 },

    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
