use thiserror::Error;

/// Errors surfaced by the library and mapped to process exit codes by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "exact mode supports n up to {limit} (got n = {n}); \
         use Monte Carlo simulation for larger ground sets"
    )]
    ExactModeExceeded { n: usize, limit: usize },

    #[error(
        "enumeration guard exceeded: C(n,m)^K = {count} sequences \
         is over the limit of {limit}"
    )]
    EnumerationGuard { count: String, limit: u64 },

    #[error(
        "training diverged at epoch {epoch}: objective {objective:.6e} \
         exceeds 1e6 x initial value {initial:.6e}"
    )]
    Diverged {
        epoch: usize,
        objective: f64,
        initial: f64,
    },

    #[error("non-finite loss at sample index {index}")]
    NonFiniteLoss { index: usize },

    #[error("step size {alpha} is outside the guarantee's scope: requires alpha < 1/L = {limit}")]
    StepSizeOutOfScope { alpha: f64, limit: f64 },

    #[error("replay mismatch for {path}: manifest digest {expected}, got {actual}")]
    ReplayMismatch {
        path: String,
        expected: String,
        actual: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 invalid arguments, 3 numeric-mode
    /// rejection, 4 training divergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::StepSizeOutOfScope { .. } => 2,
            Error::ExactModeExceeded { .. } | Error::EnumerationGuard { .. } => 3,
            Error::Diverged { .. } => 4,
            _ => 1,
        }
    }
}
