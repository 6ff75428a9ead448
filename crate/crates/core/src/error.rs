//! Crate-wide error type.

/// Convenience alias for results produced by this crate.
pub type Result<U> = std::result::Result<U, Error>;

/// Errors produced by the kinematics, dynamics, simulation, and estimation
/// layers.
///
/// Scalar payloads are carried as `f64` regardless of the working precision
/// so the error type stays object-safe and printable.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An arclength query fell outside the segment.
    #[error("arclength {s:.6} m is outside the segment [0, {length:.6}] m")]
    ArclengthOutOfRange { s: f64, length: f64 },

    /// A parameter set failed validation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The tendon-length map cannot be inverted for shape sensing.
    #[error(
        "tendon routing is degenerate: length map condition number {cond:.3e} \
         exceeds {max_cond:.1e}; channels must differ in angle or span"
    )]
    SingularRouting { cond: f64, max_cond: f64 },

    /// A quantity that must be finite was NaN or infinite.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// The per-station tendon tension fixed point failed to converge.
    #[error("tension cascade failed to converge at station {station} (residual {residual:.3e} N)")]
    TensionSolve { station: usize, residual: f64 },

    /// The adaptive integrator drove the step size below machine resolution.
    #[error(
        "integrator step size underflow at t = {t:.6} s; \
         the system appears stiff or the state diverged"
    )]
    StepSizeUnderflow { t: f64, last_state: Vec<f64> },

    /// The adaptive integrator exceeded its step budget.
    #[error("integrator exceeded {max_steps} steps at t = {t:.6} s")]
    TooManySteps { t: f64, max_steps: usize },

    /// A signal was shorter than the requested filter window.
    #[error("series of length {len} is shorter than the smoothing window {window}")]
    SeriesTooShort { len: usize, window: usize },

    /// Wrench-recovery constraints were mutually inconsistent.
    #[error("wrench constraints are inconsistent: residual {residual:.3e}")]
    InconsistentConstraints { residual: f64 },

    /// A trajectory file did not match the expected schema.
    #[error("trajectory format error: {0}")]
    TrajectoryFormat(String),

    /// Input/output failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(String),

    /// The calibration optimizer could not make progress.
    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::TrajectoryFormat(e.to_string())
    }
}
