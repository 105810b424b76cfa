use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("wave packet too wide for grid: 4*width = {four_width} >= half extent {half_extent}")]
    PacketTooWide { four_width: f64, half_extent: f64 },

    #[error("momentum {momentum} aliases on grid (limit {limit})")]
    MomentumAliasing { momentum: f64, limit: f64 },

    #[error("cat branches exceed grid: separation + 4*width = {extent} >= half extent {half_extent}")]
    PacketsExceedGrid { extent: f64, half_extent: f64 },

    #[error("input amplitudes are not normalized (norm^2 = {norm_sqr})")]
    NonNormalizedInput { norm_sqr: f64 },

    #[error("density matrix has significant negative eigenvalue {min_eigenvalue}")]
    SignificantNegativity { min_eigenvalue: f64 },

    #[error("time step {dt} too large (limit {limit}, set by {constraint})")]
    StepTooLarge { dt: f64, limit: f64, constraint: &'static str },

    #[error("probability {mass} within 4 cells of the grid boundary at t = {time}")]
    GridEscape { time: f64, mass: f64 },

    #[error("trace drifted by {error} at t = {time}")]
    TraceDrift { time: f64, error: f64 },

    #[error("discord minimization did not converge (best {best} bits at theta={theta}, phi={phi})")]
    OptimizerNotConverged { best: f64, theta: f64, phi: f64 },

    #[error("no fringe detected along the momentum axis")]
    NoFringeDetected,

    #[error("third derivative of the potential vanishes at x = {x}")]
    ThirdDerivativeVanishes { x: f64 },

    #[error("time {time} is not a sample time")]
    TimeNotSampled { time: f64 },

    #[error("non-finite value in series `{column}` at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
