use thiserror::Error;

/// Errors produced by the simulation library and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("index {index} out of range for basis of dimension {dimension}")]
    IndexOutOfRange { index: u64, dimension: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dimension} exceeds the dense-oracle cap {cap}")]
    OracleTooLarge { dimension: u64, cap: usize },

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    Convergence { residual: f64, iterations: u64 },

    #[error("non-finite amplitudes produced during propagation at t = {time}")]
    NumericOverflow { time: f64 },

    #[error(
        "norm drift {drift:.3e} exceeded the bound {bound:.3e} at t = {time}; reduce dt"
    )]
    NormDrift { drift: f64, bound: f64, time: f64 },

    #[error("invalid condensate spec: {0}")]
    InvalidSpec(String),

    #[error("invalid site subset: {0}")]
    InvalidSubset(String),

    #[error("purity requires at least two sites, got {0}")]
    InvalidDimension(usize),

    #[error("pair ({j}, {k}) holds no particles; contrast and purity are undefined")]
    UndefinedPair { j: usize, k: usize },

    #[error("one-body oracle requires U = 0, got U = {0}")]
    InvalidOracleUse(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config/usage, 3 convergence, 4 accuracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Convergence { .. } => 3,
            Error::NormDrift { .. } | Error::NumericOverflow { .. } => 4,
            _ => 1,
        }
    }
}
