//! Response-time computation.
//!
//! A [`ResponseQuery`] asks for
//!
//! ```text
//! response(I, γ) = min{ t >= 0 | t >= γ + ∑_{i∈I} c_i ⌈(t + ξ_i)/p_i⌉ }
//! ```
//!
//! and the worst-case response time of task `j` is the query with
//! `I = {0, …, j-1}` and `γ = c_j`. For `k` at least a certified bound on
//! the optimal `s`, `response <= k` holds iff `Mix(I, k) <= k - γ`, which
//! lets every algorithm here use a Mixing Set solver as its decision oracle.

mod harmonic;

pub use harmonic::{catch, narrow, narrow_traced, response_harmonic, Phase, Probe};

use serde::Serialize;

use crate::arith::{self, ceil_div};
use crate::bounds::{self, BoundsResult};
use crate::error::{Error, Result};
use crate::mixing::{self, MixInstance, MixSolution, MixTerm};
use crate::model::{self, Task, TaskSystem};

/// The generalized query `response(I, γ)` over the interfering tasks `I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseQuery {
    pub tasks: Vec<Task>,
    pub gamma: i64,
}

impl ResponseQuery {
    pub fn new(tasks: Vec<Task>, gamma: i64) -> Self {
        ResponseQuery { tasks, gamma }
    }

    /// Query over the tasks of `ts` at `indices`.
    pub fn from_system(ts: &TaskSystem, indices: &[usize], gamma: i64) -> Result<Self> {
        let mut tasks = Vec::with_capacity(indices.len());
        for &i in indices {
            let t = ts.tasks.get(i).ok_or_else(|| Error::InvalidInstance(format!("task index {i} out of range")))?;
            tasks.push(*t);
        }
        let q = ResponseQuery { tasks, gamma };
        q.validate()?;
        Ok(q)
    }

    /// The response time of task `j`: all higher-priority tasks interfere
    /// and `γ = c_j`.
    pub fn for_task(ts: &TaskSystem, j: usize) -> Result<Self> {
        let t = ts.tasks.get(j).ok_or_else(|| Error::InvalidInstance(format!("task index {j} out of range")))?;
        let indices: Vec<usize> = (0..j).collect();
        Self::from_system(ts, &indices, t.c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 1 {
            return Err(Error::InvalidInstance(format!("gamma = {} must be at least 1", self.gamma)));
        }
        if !self.tasks.is_empty() {
            model::validate(&TaskSystem::new(self.tasks.clone()))?;
        }
        let util = model::utilization_of(&self.tasks);
        if util >= num_traits::One::one() {
            return Err(Error::UtilizationExceeded { utilization: util.to_string() });
        }
        Ok(())
    }

    pub fn is_harmonic(&self) -> bool {
        arith::is_harmonic_values(&self.periods())
    }

    pub fn is_jitter_free(&self) -> bool {
        self.tasks.iter().all(|t| t.jitter == 0)
    }

    pub fn periods(&self) -> Vec<i64> {
        self.tasks.iter().map(|t| t.p).collect()
    }

    pub fn bounds(&self) -> Result<BoundsResult> {
        bounds::query_bounds(&self.tasks, self.gamma)
    }

    /// Right-hand side `γ + ∑ c_i ⌈(t + ξ_i)/p_i⌉` of the defining inequality.
    pub fn demand(&self, t: i64) -> i128 {
        arith::count(self.tasks.len() as u64 + 1);
        self.gamma as i128
            + self.tasks.iter().map(|k| k.c as i128 * ceil_div(t as i128 + k.jitter as i128, k.p as i128)).sum::<i128>()
    }

    /// True iff `t >= 0` satisfies the defining inequality.
    pub fn is_feasible(&self, t: i64) -> bool {
        t >= 0 && t as i128 >= self.demand(t)
    }

    /// `max{ t - ∑ c_i x_i | t <= k, p_i x_i >= t + ξ_i }` by enumeration over
    /// `t ∈ [0, k]`. Equals `k - Mix(I, k)` once `k` clears the bound on `s`.
    pub fn dual_value(&self, k: i64) -> i128 {
        (0..=k).map(|t| t as i128 - (self.demand(t) - self.gamma as i128)).max().unwrap_or(i128::MIN)
    }
}

/// Answer of a single decision probe `response <= k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionOutcome {
    pub verdict: bool,
    pub k: i64,
    pub certificate: Option<MixSolution>,
}

/// Least fixed point of `t ↦ max(0, γ + ∑ c_i ⌈(t + ξ_i)/p_i⌉)` if it is at
/// most `horizon`, without any utilization or sign requirement on the query.
pub fn response_bounded(q: &ResponseQuery, horizon: i64) -> Option<i64> {
    let mut t: i128 = 0;
    loop {
        let next = q.demand(t as i64).max(0);
        if next == t {
            return Some(t as i64);
        }
        if next > horizon as i128 {
            return None;
        }
        t = next;
    }
}

/// Fixed-point iteration from `γ`, capped by the upper bound `u`.
pub fn response_bruteforce(q: &ResponseQuery) -> Result<i64> {
    q.validate()?;
    let b = q.bounds()?;
    let mut t = q.gamma;
    loop {
        let next = q.demand(t);
        if next == t as i128 {
            return Ok(t);
        }
        if next > b.u as i128 {
            return Err(Error::InternalInvariantViolated(format!(
                "fixed-point iteration passed the upper bound u = {}",
                b.u
            )));
        }
        t = next as i64;
    }
}

/// `Mix(I, k)`: `w0 = 1` and one term `(c_i, p_i, k + ξ_i)` per task.
pub fn build_mix_for_k(q: &ResponseQuery, k: i64) -> MixInstance {
    MixInstance::new(1, q.tasks.iter().map(|t| MixTerm { w: t.c, a: t.p, b: k + t.jitter }).collect())
}

/// The certified bound on the optimal `s` of `Mix(I, k)`; it does not depend on `k`.
pub fn certified_s_bound(q: &ResponseQuery) -> Result<i64> {
    mixing::s_search_bound(&build_mix_for_k(q, 0))
}

/// Decide `response <= k` through `Mix(I, k) <= k - γ`.
///
/// The probe is only valid once `k` is at least a certified bound on the
/// optimal `s`; the gate accepts `k >= certified_s_bound`, harmonic periods
/// with `k >= max p_i`, and jitter-free queries, where `s = k, x = 0` is
/// feasible and the bound holds for every `k`.
pub fn decide_large_k(q: &ResponseQuery, k: i64) -> Result<DecisionOutcome> {
    if k < 1 {
        return Err(Error::Precondition(format!("probe k = {k} must be at least 1")));
    }
    if q.tasks.is_empty() {
        return Ok(DecisionOutcome { verdict: q.gamma <= k, k, certificate: None });
    }
    let max_p = q.tasks.iter().map(|t| t.p).max().unwrap_or(0);
    let harmonic = q.is_harmonic();
    let gated = q.is_jitter_free() || (harmonic && k >= max_p);
    if !gated {
        let bound = certified_s_bound(q)?;
        if k < bound {
            return Err(Error::PreconditionKTooSmall { k, bound });
        }
    }
    let inst = build_mix_for_k(q, k);
    let sol = if harmonic { mixing::solve_harmonic(&inst)? } else { mixing::solve_breakpoints(&inst)? };
    mixing::check_solution(&inst, &sol)?;
    Ok(DecisionOutcome { verdict: sol.objective as i128 <= k as i128 - q.gamma as i128, k, certificate: Some(sol) })
}

/// The forced value of `x_i = ⌈(t + ξ_i)/p_i⌉` for `0 < t <= p_i`.
pub fn two_values(task: &Task, t: i64) -> Result<u8> {
    if t <= 0 || t > task.p {
        return Err(Error::Precondition(format!("t = {t} outside (0, p = {}]", task.p)));
    }
    Ok(if t <= task.p - task.jitter { 1 } else { 2 })
}

/// Check the result against the defining inequality and the bounds.
pub(crate) fn verify_result(q: &ResponseQuery, t: i64, b: &BoundsResult) -> Result<i64> {
    let fail = |what: &str| Err(Error::InternalInvariantViolated(format!("result t = {t} {what}")));
    if !q.is_feasible(t) {
        return fail("is not feasible");
    }
    if t >= 1 && q.is_feasible(t - 1) {
        return fail("is not minimal, t - 1 is feasible");
    }
    if arith::rational_from(t as i128) < b.ell || t > b.u {
        return fail("lies outside the bounds");
    }
    Ok(t)
}

/// Scan every residue `ρ ∈ [0, m)` with `m = lcm p_i`: a fixed point of the
/// form `ρ + λm` exists iff `λ = (w(ρ) - ρ)/((1 - U)m)` is a nonnegative
/// integer, where `w(ρ) = γ + ∑ c_i ⌈(ρ + ξ_i)/p_i⌉`.
pub fn response_lcm_scan(q: &ResponseQuery) -> Result<i64> {
    q.validate()?;
    let b = q.bounds()?;
    let m = arith::lcm_capped(q.tasks.iter().map(|t| t.p))? as i128;
    let denom: i128 = m - q.tasks.iter().map(|t| t.c as i128 * (m / t.p as i128)).sum::<i128>();
    let mut best: Option<i128> = None;
    for rho in 0..m {
        let w = q.demand(rho as i64);
        let num = w - rho;
        if num >= 0 && num % denom == 0 {
            let t = rho + (num / denom) * m;
            best = Some(best.map_or(t, |v: i128| v.min(t)));
        }
    }
    let t = best.ok_or_else(|| Error::InternalInvariantViolated("lcm scan found no fixed point".into()))?;
    verify_result(q, arith::to_capped_i64(t, "response")?, &b)
}

/// Decide once at the certified bound `S`, then scan below it or binary
/// search above it.
pub fn response_turing(q: &ResponseQuery) -> Result<i64> {
    q.validate()?;
    let b = q.bounds()?;
    if q.tasks.is_empty() {
        return verify_result(q, q.gamma, &b);
    }
    let s = certified_s_bound(q)?;
    if s >= q.gamma && decide_large_k(q, s)?.verdict {
        let t = (q.gamma..=s).find(|&t| q.is_feasible(t)).unwrap_or(s);
        return verify_result(q, t, &b);
    }
    let mut lo = (s + 1).max(b.ell_ceil()?);
    let mut hi = b.u;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if decide_large_k(q, mid)?.verdict {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    verify_result(q, hi, &b)
}

/// Binary search over `[⌈ℓ⌉, u]` for jitter-free queries, where every probe is valid.
pub fn response_jitter_free(q: &ResponseQuery) -> Result<i64> {
    if !q.is_jitter_free() {
        return Err(Error::Precondition("query has nonzero jitter".into()));
    }
    q.validate()?;
    let b = q.bounds()?;
    let mut lo = b.ell_ceil()?.max(1);
    let mut hi = b.u;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if decide_large_k(q, mid)?.verdict {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    verify_result(q, hi, &b)
}

/// Which response-time algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Harmonic periods use Narrow/Catch, jitter-free queries the unconditional
    /// reduction, everything else the Turing reduction.
    Auto,
    Harmonic,
    LcmScan,
    Turing,
    JitterFree,
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Auto,
        Algorithm::Harmonic,
        Algorithm::LcmScan,
        Algorithm::Turing,
        Algorithm::JitterFree,
        Algorithm::BruteForce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Harmonic => "harmonic",
            Algorithm::LcmScan => "lcm-scan",
            Algorithm::Turing => "turing",
            Algorithm::JitterFree => "jitter-free",
            Algorithm::BruteForce => "brute-force",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    /// The concrete algorithm `Auto` picks for `q`.
    pub fn resolve(self, q: &ResponseQuery) -> Algorithm {
        match self {
            Algorithm::Auto if q.is_harmonic() => Algorithm::Harmonic,
            Algorithm::Auto if q.is_jitter_free() => Algorithm::JitterFree,
            Algorithm::Auto => Algorithm::Turing,
            other => other,
        }
    }
}

/// Run the selected algorithm; returns the response and the algorithm used.
pub fn response(q: &ResponseQuery, algorithm: Algorithm) -> Result<(i64, Algorithm)> {
    let used = algorithm.resolve(q);
    let r = match used {
        Algorithm::Harmonic => response_harmonic(q)?,
        Algorithm::LcmScan => response_lcm_scan(q)?,
        Algorithm::Turing => response_turing(q)?,
        Algorithm::JitterFree => response_jitter_free(q)?,
        Algorithm::BruteForce => response_bruteforce(q)?,
        Algorithm::Auto => unreachable!("resolved above"),
    };
    Ok((r, used))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub response: i64,
    pub algorithm: Algorithm,
    /// `response <= d - ξ`, or `None` without a deadline.
    pub schedulable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemReport {
    pub tasks: Vec<TaskReport>,
    /// Conjunction of the per-task verdicts; `None` if any deadline is
    /// missing and no task is known to miss its deadline.
    pub schedulable: Option<bool>,
}

/// Response time and verdict of every task in priority order.
pub fn analyze_system(ts: &TaskSystem, algorithm: Algorithm) -> Result<SystemReport> {
    model::validate(ts)?;
    let mut reports = Vec::with_capacity(ts.len());
    for j in 0..ts.len() {
        let util = model::utilization_of(&ts.tasks[..j]);
        if util >= num_traits::One::one() {
            return Err(Error::UtilizationExceeded { utilization: util.to_string() });
        }
        let q = ResponseQuery::for_task(ts, j)?;
        let (r, used) = response(&q, algorithm)?;
        let task = &ts.tasks[j];
        let schedulable = task.d.map(|d| r <= d - task.jitter);
        reports.push(TaskReport { index: j, response: r, algorithm: used, schedulable });
    }
    let schedulable = if reports.iter().any(|r| r.schedulable == Some(false)) {
        Some(false)
    } else if reports.iter().all(|r| r.schedulable == Some(true)) {
        Some(true)
    } else {
        None
    };
    Ok(SystemReport { tasks: reports, schedulable })
}

/// Number of distinct nonzero differences `p_i - ξ_i`.
pub fn distinct_differences(q: &ResponseQuery) -> usize {
    let mut d: Vec<i64> = q.tasks.iter().map(|t| t.p - t.jitter).filter(|&d| d != 0).collect();
    d.sort_unstable();
    d.dedup();
    d.len()
}

#[cfg(test)]
mod tests;
