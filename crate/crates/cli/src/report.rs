use std::fs;
use std::io::Read;
use std::time::Instant;

use rtmix_core::arith;
use rtmix_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Core(e) => match e {
                Error::Infeasible | Error::Unbounded | Error::UtilizationExceeded { .. } => EXIT_NEGATIVE,
                Error::OverflowLimit(_) | Error::BudgetExceeded { .. } => EXIT_LIMIT,
                Error::InternalInvariantViolated(_) => EXIT_MISMATCH,
                Error::InvalidInstance(_)
                | Error::Precondition(_)
                | Error::PreconditionKTooSmall { .. }
                | Error::MalformedBlocks(_)
                | Error::HorizonTooSmall { .. }
                | Error::GenerationFailed { .. } => EXIT_INPUT,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Mismatch(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub wall_ms: f64,
    /// Solver-maintained arithmetic-operation count.
    pub ops: u64,
}

/// Starts the wall clock and resets the operation counter.
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        arith::reset_ops();
        Stopwatch(Instant::now())
    }

    pub fn stop(&self) -> Timings {
        Timings { wall_ms: self.0.elapsed().as_secs_f64() * 1e3, ops: arith::ops() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub result: Value,
    pub algorithm: Option<String>,
    pub certificates: Vec<Value>,
    pub timings: Timings,
    /// The input instance, so that a report can be fed back as input.
    pub instance: Value,
    /// `Some` when `--verify` ran.
    pub verified: Option<bool>,
}

/// What a command hands back to `main`.
pub struct Outcome {
    pub report: Option<Report>,
    /// Plain JSON for commands that produce instances rather than reports.
    pub raw: Option<Value>,
    pub text: String,
    pub exit: i32,
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn read_source(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

/// Parse an instance file. A report produced by this tool is accepted too,
/// in which case its echoed `instance` is used.
pub fn load<T: DeserializeOwned>(path: &str) -> CliResult<(T, Value)> {
    let text = read_source(path)?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    if let Value::Object(map) = &mut value {
        if map.contains_key("result") {
            if let Some(inner) = map.remove("instance") {
                value = inner;
            }
        }
    }
    let parsed = serde_json::from_value(value.clone()).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    Ok((parsed, value))
}
