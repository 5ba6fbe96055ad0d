use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, malformed config files, unknown keys.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the mathematical domain of an operation (e.g. theta <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver failed: {reason} (objective at bracket ends: {lo_value:.6e}, {hi_value:.6e})")]
    Solver {
        reason: String,
        lo_value: f64,
        hi_value: f64,
    },

    #[error("numerical accuracy not reached: {what} (error estimate {error_estimate:.3e}, tolerance {tolerance:.3e})")]
    Numerical {
        what: String,
        error_estimate: f64,
        tolerance: f64,
    },

    /// The policy drains the battery on average, so the decay rate is undefined.
    #[error("unstable demand policy: mean net flow E{{z}} = {mean_net_flow:.6e} <= 0")]
    Unstable { mean_net_flow: f64 },

    #[error("under-sampled tail at threshold {threshold}: {events} events (need {required})")]
    UnderSampled {
        threshold: f64,
        events: u64,
        required: u64,
    },

    #[error("degenerate tail: fitted slope {slope:.3e} is not negative")]
    DegenerateTail { slope: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the `ehsim` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Io(_) | Error::Csv(_) => 1,
            Error::Solver { .. }
            | Error::Numerical { .. }
            | Error::UnderSampled { .. }
            | Error::DegenerateTail { .. } => 2,
            Error::Unstable { .. } => 3,
        }
    }
}
