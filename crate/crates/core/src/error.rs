use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("non-finite state in Runge-Kutta stage {stage} of step {step} (CFL violation or blow-up)")]
    NonFiniteStage { step: usize, stage: usize },

    #[error("non-positive depth {depth:e} at index {index} (vacuum is not supported)")]
    NonPositiveDepth { index: usize, depth: f64 },

    #[error("velocity history has {available} steps, step {requested} requested")]
    StepOutOfRange { requested: usize, available: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root finding did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("observation covariance is not positive definite (entry {index} = {value:e})")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("innovation covariance is numerically singular (condition estimate {condition:e})")]
    SingularInnovation { condition: f64 },

    #[error("degenerate prior weight: the gradient second moment vanishes everywhere")]
    DegeneratePriorWeight,

    #[error("eigen-decomposition did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("spatial window [{lo}, {hi}] contains no grid point")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("time grids differ at row {row}: {left} vs {right}")]
    TimeGridMismatch { row: usize, left: f64, right: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::Parse(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
