use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent real part {0} exceeds the direct-evaluation limit")]
    Overflow(f64),
    #[error("value is zero to working precision; point is indeterminate")]
    ZeroValue,
    #[error("dominant prefactor Q_m(z) vanishes (|Q_m| = {0:e})")]
    DegenerateQ(f64),
    #[error("growth hypotheses need d >= 3, got d = {0}")]
    RequiresD3(u32),
    #[error("point lies in E2; distance bound does not apply")]
    NotApplicable,
    #[error("M(R, f) <= R at R = {0}")]
    BadBase(f64),
    #[error("sigma = {sigma} outside (0, {upper})")]
    BadSigma { sigma: f64, upper: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid function definition: {0}")]
    InvalidDefinition(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
