use thiserror::Error;

/// Errors raised by the fast-forward library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field has zero norm")]
    ZeroNorm,

    #[error("time {t} outside [0, {t_ff}]")]
    TimeOutOfRange { t: f64, t_ff: f64 },

    #[error("trajectory reaches non-positive value {value} at t = {t}")]
    NonPositiveTrajectory { t: f64, value: f64 },

    #[error("grid too narrow: edge amplitude {0:e} exceeds 1e-6")]
    GridTooNarrow(f64),

    #[error("grid [{x_min}, {x_max}] does not span the box [0, {length}]")]
    DomainMismatch { x_min: f64, x_max: f64, length: f64 },

    #[error("position {x} outside the box [0, {length}]")]
    OutsideBox { x: f64, length: f64 },

    #[error("no level with quantum number {0} in this model")]
    InvalidLevel(usize),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:e} after {intervals} intervals")]
    QuadratureNoConvergence {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("time-scaling factor {value} < 0 at t = {t}")]
    NegativeScaling { t: f64, value: f64 },

    #[error("regularization phase is singular at x = {x}: density {density:e}, running integral {integral:e}")]
    SingularPhase { x: f64, density: f64, integral: f64 },

    #[error("drive potential is missing the `{0}` term")]
    MissingDriveTerm(&'static str),

    #[error("phase-rotation bound violated at t = {t}: dt*max|V|/hbar = {ratio} >= 0.5")]
    StabilityBound { t: f64, ratio: f64 },

    #[error("grid under-resolves the initial state: max neighbour jump {0} of peak amplitude")]
    UnderResolved(f64),

    #[error("norm drift {drift:e} at t = {t} exceeds 1e-6")]
    NormDrift { t: f64, drift: f64 },

    #[error("centered stencil at t = {t} with dt = {dt} leaves [{start}, {end}]")]
    StencilOutOfRange {
        t: f64,
        dt: f64,
        start: f64,
        end: f64,
    },

    #[error("particle number {n} outside (0, {levels})")]
    ParticleNumberOutOfRange { n: f64, levels: usize },

    #[error("level cutoff {cutoff} too small: last occupation {occupation:e} >= 1e-12")]
    CutoffTooSmall { cutoff: usize, occupation: f64 },

    #[error("Ermakov scaling function reaches {value} <= 0 at t = {t}")]
    NonPositiveScaling { t: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
