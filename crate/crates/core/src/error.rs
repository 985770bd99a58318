use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {what} (residual {residual:e})")]
    NumericalFailure { what: String, residual: f64 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("no blocking: omega * tau0 = {0} >= 1, relaxation always outruns the drive")]
    NoBlocking(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
