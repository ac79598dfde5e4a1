use thiserror::Error;

/// Errors raised by the analyses, solvers and generators of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// The higher-priority utilization reached 1, so no finite response time exists.
    #[error("higher-priority utilization {utilization} is not below 1")]
    UtilizationExceeded { utilization: String },

    #[error("magnitude cap exceeded: {0}")]
    OverflowLimit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A decision probe below the certified bound on `s` was requested.
    #[error("probe k = {k} is below the certified bound S = {bound}")]
    PreconditionKTooSmall { k: i64, bound: i64 },

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolated(String),

    #[error("mixing set instance is unbounded")]
    Unbounded,

    #[error("no feasible value in the search range")]
    Infeasible,

    #[error("malformed block structure: {0}")]
    MalformedBlocks(String),

    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },

    #[error("horizon {horizon} too small: job of task {task} released at {release} does not finish")]
    HorizonTooSmall { horizon: i64, task: usize, release: i64 },

    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
