use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambda must lie strictly between 1 and 2, got {0}")]
    LambdaOutOfRange(f64),

    #[error("level K must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("index must be at least {min}, got {got}")]
    InvalidIndex { min: u64, got: u64 },

    #[error(
        "no disjointness certificate for lambda = {lambda} below scan_upper = {scan_upper}; \
         the margin is not yet positive and increasing (raise scan_upper)"
    )]
    CertificateNotFound { lambda: f64, scan_upper: u64 },

    #[error("log r = {log_r} lies on the singular modulus of index {index} (log A = {log_a})")]
    RadiusOnSingularity { log_r: f64, index: u64, log_a: f64 },

    #[error("adaptive quadrature hit the cap of {cap} intervals (error estimate {estimate:e})")]
    QuadratureCapExceeded { cap: usize, estimate: f64 },

    #[error("order fit needs >= {min_samples} samples spanning >= {min_span} in log log r; got {samples} samples, span {span}")]
    InsufficientSpan {
        samples: usize,
        span: f64,
        min_samples: usize,
        min_span: f64,
    },

    #[error("sample at log r = {log_r} has non-positive characteristic T = {t}")]
    NonPositiveCharacteristic { log_r: f64, t: f64 },

    #[error("no scan regime available for direction theta = {0}")]
    RegimeUnavailable(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
