//! Sporadic task model: tasks, priority-ordered systems, validation and
//! utilization checks.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, ratio, Rational};
use crate::error::{Error, Result};

/// A sporadic task `(c, d, p, jitter)`.
///
/// The deadline is optional: response times never read it, only
/// schedulability verdicts do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    pub c: i64,
    #[serde(default)]
    pub d: Option<i64>,
    pub p: i64,
    #[serde(default)]
    pub jitter: i64,
}

impl Task {
    pub fn new(c: i64, d: Option<i64>, p: i64, jitter: i64) -> Self {
        Task { c, d, p, jitter }
    }

    /// A task without deadline, as used in pure response-time queries.
    pub fn rtc(c: i64, p: i64, jitter: i64) -> Self {
        Task { c, d: None, p, jitter }
    }

    pub fn utilization(&self) -> Rational {
        ratio(self.c, self.p)
    }

    fn check(&self, index: usize) -> Result<()> {
        let fail = |what: String| Err(Error::InvalidInstance(format!("task {index}: {what}")));
        if self.c < 1 {
            return fail(format!("c = {} must be at least 1", self.c));
        }
        if self.p < 1 {
            return fail(format!("p = {} must be at least 1", self.p));
        }
        if self.jitter < 0 || self.jitter > self.p {
            return fail(format!("jitter = {} must lie in [0, p = {}]", self.jitter, self.p));
        }
        if let Some(d) = self.d {
            if d < self.c || d > self.p {
                return fail(format!("d = {d} must satisfy c = {} <= d <= p = {}", self.c, self.p));
            }
        }
        Ok(())
    }
}

/// Tasks in priority order: index 0 has the highest priority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSystem {
    pub tasks: Vec<Task>,
}

/// Result of the general utilization check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilizationReport {
    /// Utilization of all tasks but the last.
    pub higher: Rational,
    /// Utilization of the whole system.
    pub total: Rational,
    /// Whether the total utilization is at most 1.
    pub schedulability_bound_holds: bool,
}

impl TaskSystem {
    pub fn new(tasks: Vec<Task>) -> Self {
        TaskSystem { tasks }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn last(&self) -> &Task {
        self.tasks.last().expect("validated systems are nonempty")
    }

    pub fn periods(&self) -> Vec<i64> {
        self.tasks.iter().map(|t| t.p).collect()
    }

    pub fn is_jitter_free(&self) -> bool {
        self.tasks.iter().all(|t| t.jitter == 0)
    }

    /// The same system with all jitters set to zero.
    pub fn without_jitter(&self) -> TaskSystem {
        TaskSystem { tasks: self.tasks.iter().map(|t| Task { jitter: 0, ..*t }).collect() }
    }
}

/// Check every task invariant and that the system is nonempty.
pub fn validate(ts: &TaskSystem) -> Result<()> {
    if ts.tasks.is_empty() {
        return Err(Error::InvalidInstance("task system is empty".into()));
    }
    ts.tasks.iter().enumerate().try_for_each(|(i, t)| t.check(i))
}

/// Exact `∑ c_i / p_i`, over all tasks or over all but the last one.
pub fn utilization(ts: &TaskSystem, exclude_last: bool) -> Rational {
    let n = if exclude_last { ts.len().saturating_sub(1) } else { ts.len() };
    utilization_of(&ts.tasks[..n])
}

pub fn utilization_of(tasks: &[Task]) -> Rational {
    tasks.iter().fold(Rational::zero(), |acc, t| acc + t.utilization())
}

/// Ok iff the higher-priority utilization is strictly below 1, which by
/// integrality is the same as being at most `1 - 1/lcm`.
pub fn check_general_utilization_bound(ts: &TaskSystem) -> Result<UtilizationReport> {
    let higher = utilization(ts, true);
    if higher >= Rational::one() {
        return Err(Error::UtilizationExceeded { utilization: higher.to_string() });
    }
    let total = utilization(ts, false);
    let schedulability_bound_holds = total <= Rational::one();
    Ok(UtilizationReport { higher, total, schedulability_bound_holds })
}

/// True iff every pair of periods divides in the larger-by-smaller direction.
pub fn is_harmonic(ts: &TaskSystem) -> bool {
    arith::is_harmonic_values(&ts.periods())
}
