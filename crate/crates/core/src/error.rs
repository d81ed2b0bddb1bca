use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("profile does not decay: {0}")]
    NoDecay(String),
    #[error("truncation spec does not match profile: {0}")]
    SpecMismatch(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable snake_case tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ConstraintViolation(_) => "constraint_violation",
            Error::DegenerateNorm(_) => "degenerate_norm",
            Error::InsufficientRange(_) => "insufficient_range",
            Error::InvalidExponent(_) => "invalid_exponent",
            Error::NoDecay(_) => "no_decay",
            Error::SpecMismatch(_) => "spec_mismatch",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InvalidRange(_) => "invalid_range",
            Error::NoSolution(_) => "no_solution",
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
