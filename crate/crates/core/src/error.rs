use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range. `name` is the field or
    /// flag that was rejected.
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("photon-number truncation at n_max = {n_max} drops more than 1e-9 of the mass; use n_max >= {required}")]
    TruncationTooSmall { n_max: usize, required: usize },

    #[error("heralding probability {0:e} is degenerate (no herald can fire)")]
    DegenerateHerald(f64),

    #[error("closed form requires {name} <= {limit}, got {value}; use the exact method")]
    ClosedFormOutOfRange {
        name: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("required transmission {f_min:e} exceeds the zero-length transmission {f_max:e}: insecure at any distance")]
    Unattainable { f_min: f64, f_max: f64 },

    #[error("optimum is degenerate: {0}")]
    DegenerateOptimum(&'static str),

    #[error("objective returned a non-finite value at x = {x}")]
    NonFiniteObjective { x: f64 },

    #[error("bracket [{lo}, {hi}] is not ordered")]
    BadBracket { lo: f64, hi: f64 },

    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),

    #[error("security margin is not monotone in the transmission on [{lo:e}, {hi:e}]")]
    NonMonotoneMargin { lo: f64, hi: f64 },

    #[error("the analytic reference exists only for an honest channel")]
    EavesdropperPresent,

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
