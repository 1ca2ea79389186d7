use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain the model is defined on.
    InvalidParameter(&'static str),
    /// |w| reached 1, where the two-mode equations are singular.
    Singularity { w: f64 },
    /// A closed-form expression has no real value for these inputs.
    Domain(&'static str),
    /// The adaptive integrator could not make progress.
    StepUnderflow { t: f64, h: f64 },
    /// An input violates a documented precondition.
    Precondition(&'static str),
    /// Not enough oscillation in a signal for the requested estimate.
    NoOscillation { crossings: usize },
    /// Too few extrema to fit an envelope.
    TooFewExtrema { found: usize },
    /// The trajectory is too short for a verdict.
    Inconclusive(&'static str),
    /// A Lyapunov run hit the singularity guard.
    GuardedEstimate { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::Singularity { w } => write!(f, "singular state: |w| = {} >= 1", w.abs()),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::StepUnderflow { t, h } => {
                write!(
                    f,
                    "step size underflow at t = {t} (h = {h:e}); system looks stiff"
                )
            }
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::NoOscillation { crossings } => {
                write!(f, "signal has only {crossings} zero crossings")
            }
            Error::TooFewExtrema { found } => write!(f, "only {found} local extrema found"),
            Error::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            Error::GuardedEstimate { t } => {
                write!(
                    f,
                    "Lyapunov trajectory reached the singularity guard at t = {t}"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
