use thiserror::Error;

/// Errors raised by the solvers, the simulator and the command-line front end.
#[derive(Debug, Error)]
pub enum AgoraError {
    #[error("degenerate density {density:e} at theta = {theta}")]
    DegenerateDensity { theta: f64, density: f64 },

    #[error("empty segment [{a}, {b}]: F(b) - F(a) = {mass:e}")]
    EmptySegment { a: f64, b: f64, mass: f64 },

    #[error("distribution is not regular ({} violation points, first at theta = {first})", .count)]
    NotRegular { count: usize, first: f64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible cutoffs: F(low) = {f_low}, 1 - F(high) = {one_minus_f_high}")]
    Infeasible { f_low: f64, one_minus_f_high: f64 },

    #[error("unbalanced segmentation: mass below = {below}, mass above = {above}")]
    Unbalanced { below: f64, above: f64 },

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("invalid distribution spec: {0}")]
    DistributionSpec(String),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, AgoraError>;
