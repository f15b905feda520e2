use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ball off grid")]
    BallOffGrid,
    #[error("degenerate ball")]
    DegenerateBall,
    #[error("rho exceeds domain")]
    RhoExceedsDomain,
    #[error("Shen estimate failed")]
    ShenEstimateFailed,
    #[error("norm overflow")]
    NormOverflow,
    #[error("invalid integrand")]
    InvalidIntegrand,
    #[error("coverage hole")]
    CoverageHole,
    #[error("degenerate input")]
    DegenerateInput,
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("kernel matrix requires a spectral propagator")]
    KernelUnavailable,
    #[error("malformed field file: {0}")]
    MalformedField(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
