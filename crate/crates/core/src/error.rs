use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero mode {mean:e} exceeds mean tolerance {tolerance:e}; Poisson problem is not solvable on the torus")]
    NonZeroMean { mean: f64, tolerance: f64 },

    #[error("reconstructed density {value} is not positive")]
    NonPositiveDensity { value: f64 },

    #[error("density range [{min}, {max}] leaves the admissible box [0.5, 2]")]
    Inadmissible { min: f64, max: f64 },

    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("simulation failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
