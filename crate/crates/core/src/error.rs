use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("singular drive frame: mode {mode} has nonzero amplitude but zero detuning")]
    SingularFrame { mode: usize },
    #[error("unsupported observable: {0}")]
    Unsupported(String),
    #[error("Hilbert dimension {dim} exceeds the configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },
    #[error("truncated thermal weight {weight:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { weight: f64, tol: f64 },
    #[error("compilation failed: {0}")]
    Compile(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("root solver failure: {0}")]
    Solver(String),
    #[error("enumeration limit: N = {n} exceeds {limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
