use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e} (tolerance {tolerance:e})")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    DecompositionFailure { dim: usize },

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("cumulant order {order} exceeds the cap of {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("two routes for {quantity} disagree: {first} vs {second}")]
    IdentityMismatch {
        quantity: &'static str,
        first: f64,
        second: f64,
    },

    #[error("Hamiltonian family is not linear in the work parameter")]
    NonlinearFamily,

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },

    #[error("imaginary-time grid too short: Z(r_max)/F^2 - 1 = {deviation:e}")]
    GridTooShort { deviation: f64 },

    #[error("fit window has {points} points, need at least {required}")]
    FitWindowTooNarrow { points: usize, required: usize },

    #[error("distribution has no continuum above the delta atom")]
    NoContinuum,

    #[error("Fourier window leaks at the end of the time grid: |g(u_max)| * window = {leak:e}")]
    AliasingDetected { leak: f64 },

    #[error("moment generating function diverges at R = {r}")]
    DivergentMgf { r: f64 },

    #[error("excess free energy is not concave near R = {r} (second difference {second_difference:e})")]
    NonConcaveInput { r: f64, second_difference: f64 },

    #[error("scaling collapse needs at least {required} curves inside the window, got {got}")]
    InsufficientCurves { got: usize, required: usize },

    #[error("quadrature did not converge at t = {t} (last change {change:e})")]
    QuadratureNonConvergent { t: f64, change: f64 },

    #[error("time window too short: |nu(t_max)| * window(t_max) = {leak:e}")]
    WindowTooShort { leak: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
