use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown drug name '{0}' (not in standardization table)")]
    UnknownDrugName(String),

    #[error("patient {patient_id}: drug line ends on day {end_day}, beyond overall survival of {survival_days} days")]
    InconsistentSpan {
        patient_id: String,
        end_day: i64,
        survival_days: u32,
    },

    #[error("cohort is empty")]
    EmptyCohort,

    #[error("unknown {field} category '{value}'")]
    UnknownCategory { field: String, value: String },

    #[error("Newton-Raphson did not converge in {iterations} iterations (max |gradient| {max_gradient:.3e})")]
    NonConvergence { iterations: usize, max_gradient: f64 },

    #[error("Hessian of the penalized partial likelihood is singular; raise the penalty")]
    SingularHessian,

    #[error("degenerate survival data: {0}")]
    DegenerateData(String),

    #[error("survival probability underflowed to zero at month {0}")]
    ZeroSurvival(u32),

    #[error("state is terminal")]
    TerminalState,

    #[error("action {action} is not legal in the current state")]
    IllegalAction { action: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("backward called with an input that does not match the forward cache")]
    StaleCache,

    #[error("no legal actions to choose from")]
    NoLegalActions,

    #[error("replay memory is empty")]
    EmptyReplay,

    #[error("regimen list '{0}' is empty after mapping to the action set")]
    EmptyRegimenList(String),

    #[error("checkpoint incompatible with environment: {0}")]
    IncompatibleCheckpoint(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: String, column: String },

    #[error("{path}:{line}: {message}")]
    Schema {
        path: String,
        line: u64,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for input/schema problems the user can fix by editing files or flags.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownDrugName(_)
                | Error::InconsistentSpan { .. }
                | Error::UnknownCategory { .. }
                | Error::MissingColumn { .. }
                | Error::Schema { .. }
                | Error::Config(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::IncompatibleCheckpoint(_)
                | Error::EmptyRegimenList(_)
        )
    }

    /// True for numerical failures in model fitting or probability evaluation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::SingularHessian
                | Error::DegenerateData(_)
                | Error::ZeroSurvival(_)
        )
    }
}
