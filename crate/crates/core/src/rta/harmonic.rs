//! Narrow and Catch: exact response times for harmonic periods.
//!
//! A probe at `k` may only use the mixing reduction for tasks with
//! `p_j < k`. Every task with `p_j >= k` is instead fixed to the value its
//! variable must take near the optimum, which by the two-values law is 1 or
//! 2 depending on the side of `p_j - ξ_j` the optimum lies on. Narrow walks
//! the sorted differences `p_j - ξ_j` until a probe succeeds, and Catch
//! binary searches the gap between two consecutive differences.

use serde::Serialize;

use super::{decide_large_k, verify_result, ResponseQuery};
use crate::error::{Error, Result};
use crate::model::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Narrow,
    Catch,
}

/// One decision probe, recorded for instrumentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub phase: Phase,
    pub k: i64,
    /// The range of `t` the fixed values are claimed to hold on.
    pub window: (i64, i64),
    /// `(task index, fixed value)` for every task kept out of the mixing instance.
    pub fixed: Vec<(usize, u8)>,
    pub feasible: bool,
}

fn difference(t: &Task) -> i64 {
    t.p - t.jitter
}

/// Decide `Mix(I ∖ fixed, k) <= k - γ'` where `γ'` adds the fixed contributions.
fn probe(q: &ResponseQuery, k: i64, fixed: &[(usize, u8)]) -> Result<bool> {
    let mut gamma = q.gamma;
    let mut rest = Vec::with_capacity(q.tasks.len());
    let mut is_fixed = vec![false; q.tasks.len()];
    for &(j, v) in fixed {
        is_fixed[j] = true;
        gamma += v as i64 * q.tasks[j].c;
    }
    for (j, t) in q.tasks.iter().enumerate() {
        if !is_fixed[j] {
            rest.push(*t);
        }
    }
    let sub = ResponseQuery { tasks: rest, gamma };
    Ok(decide_large_k(&sub, k)?.verdict)
}

struct Search<'a> {
    q: &'a ResponseQuery,
    trace: Option<&'a mut Vec<Probe>>,
}

impl Search<'_> {
    fn record(&mut self, phase: Phase, k: i64, window: (i64, i64), fixed: Vec<(usize, u8)>, feasible: bool) {
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(Probe { phase, k, window, fixed, feasible });
        }
    }

    fn narrow(&mut self, u: i64) -> Result<i64> {
        let q = self.q;
        let mut ks: Vec<i64> = q.tasks.iter().map(difference).filter(|&d| d != 0).collect();
        ks.sort_unstable();
        ks.dedup();

        let mut prev = 0;
        for &k in &ks {
            let mut fixed = Vec::new();
            for (j, t) in q.tasks.iter().enumerate() {
                if k <= difference(t) {
                    fixed.push((j, 1));
                } else if k <= t.p {
                    fixed.push((j, 2));
                }
            }
            let feasible = probe(q, k, &fixed)?;
            self.record(Phase::Narrow, k, (prev + 1, k), fixed, feasible);
            if feasible {
                return self.catch(prev + 1, k);
            }
            prev = k;
        }
        self.catch(prev + 1, u)
    }

    fn catch(&mut self, mut lo: i64, mut hi: i64) -> Result<i64> {
        let q = self.q;
        let ones: Vec<(usize, u8)> =
            q.tasks.iter().enumerate().filter(|(_, t)| hi <= difference(t)).map(|(j, _)| (j, 1)).collect();
        while lo != hi {
            let k = lo + (hi - lo) / 2;
            let mut fixed = ones.clone();
            fixed.extend(
                q.tasks.iter().enumerate().filter(|(_, t)| k <= t.p && t.p < lo + t.jitter).map(|(j, _)| (j, 2)),
            );
            let feasible = probe(q, k, &fixed)?;
            self.record(Phase::Catch, k, (lo, k), fixed, feasible);
            if feasible {
                hi = k;
            } else {
                lo = k + 1;
            }
        }
        Ok(hi)
    }
}

fn check_harmonic(q: &ResponseQuery) -> Result<()> {
    q.validate()?;
    if !q.is_harmonic() {
        return Err(Error::Precondition("periods are not harmonic".into()));
    }
    Ok(())
}

/// Walk the sorted nonzero differences `p_j - ξ_j` and hand the first
/// feasible gap to [`catch`].
pub fn narrow(q: &ResponseQuery) -> Result<i64> {
    check_harmonic(q)?;
    let u = q.bounds()?.u;
    Search { q, trace: None }.narrow(u)
}

/// [`narrow`], recording every probe.
pub fn narrow_traced(q: &ResponseQuery) -> Result<(i64, Vec<Probe>)> {
    check_harmonic(q)?;
    let u = q.bounds()?.u;
    let mut trace = Vec::new();
    let r = Search { q, trace: Some(&mut trace) }.narrow(u)?;
    Ok((r, trace))
}

/// Binary search for the response in `[lo, hi]`, given that it lies there
/// and no difference `p_j - ξ_j` falls in `[lo, hi)`.
pub fn catch(q: &ResponseQuery, lo: i64, hi: i64) -> Result<i64> {
    check_harmonic(q)?;
    if lo > hi {
        return Err(Error::Precondition(format!("empty interval [{lo}, {hi}]")));
    }
    Search { q, trace: None }.catch(lo, hi)
}

/// Narrow/Catch with a final check against the defining inequality.
pub fn response_harmonic(q: &ResponseQuery) -> Result<i64> {
    check_harmonic(q)?;
    let b = q.bounds()?;
    let r = Search { q, trace: None }.narrow(b.u)?;
    verify_result(q, r, &b)
}
