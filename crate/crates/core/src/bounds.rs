//! Lower and upper bounds on worst-case response times.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::arith::{self, ratio, rational_from, Rational};
use crate::error::{Error, Result};
use crate::model::{self, Task, TaskSystem};

/// Bounds `ell <= r <= u` on a response time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsResult {
    pub ell: Rational,
    pub u1: Rational,
    /// A positive multiple of the lcm of the interfering periods.
    pub u2: i64,
    /// `min(⌈u1⌉, u2)`, the integer upper end used by searches.
    pub u: i64,
}

impl BoundsResult {
    /// `⌈ell⌉`, the smallest integer a response time can take.
    pub fn ell_ceil(&self) -> Result<i64> {
        arith::bigint_to_capped(&arith::rational_ceil(&self.ell), "ell")
    }
}

/// Bounds for the generalized query `min{t | t >= gamma + ∑ c_i ⌈(t + jitter_i)/p_i⌉}`
/// over the tasks `interfering`.
pub fn query_bounds(interfering: &[Task], gamma: i64) -> Result<BoundsResult> {
    let util = model::utilization_of(interfering);
    if util >= Rational::one() {
        return Err(Error::UtilizationExceeded { utilization: util.to_string() });
    }
    let slack = arith::one_minus(&util);
    let jitter_load =
        interfering.iter().fold(Rational::zero(), |acc, t| acc + ratio(t.jitter, t.p) * rational_from(t.c as i128));
    let cost_sum: i128 = interfering.iter().map(|t| t.c as i128).sum();

    let ell = (rational_from(gamma as i128) + jitter_load) / &slack;
    let u1 = &ell + rational_from(cost_sum) / &slack;

    let m = arith::lcm_capped(interfering.iter().map(|t| t.p))? as i128;
    // (1 - U) * m is a positive integer
    let denom: i128 = m - interfering.iter().map(|t| t.c as i128 * (m / t.p as i128)).sum::<i128>();
    debug_assert!(denom >= 1);
    let u2 = arith::ceil_div(gamma as i128 + cost_sum, denom)
        .checked_mul(m)
        .ok_or_else(|| Error::OverflowLimit("u2 overflows".into()))?;
    let u2 = arith::to_capped_i64(u2, "u2")?;

    let u1_ceil = arith::rational_ceil(&u1);
    let u = if u1_ceil < BigInt::from(u2) { arith::bigint_to_capped(&u1_ceil, "u1")? } else { u2 };
    Ok(BoundsResult { ell, u1, u2, u })
}

/// Bounds on `r_n`, the response time of the lowest-priority task.
pub fn response_bounds(ts: &TaskSystem) -> Result<BoundsResult> {
    model::validate(ts)?;
    model::check_general_utilization_bound(ts)?;
    let n = ts.len();
    query_bounds(&ts.tasks[..n - 1], ts.tasks[n - 1].c)
}

/// Jitter-free bounds `c_n / (1 - U) <= r_n <= P` where `P` is the
/// hyperperiod of the whole system.
pub fn jitter_free_bounds(ts: &TaskSystem) -> Result<(Rational, i64)> {
    model::validate(ts)?;
    if !ts.is_jitter_free() {
        return Err(Error::Precondition("jitter-free bounds need zero jitter".into()));
    }
    let report = model::check_general_utilization_bound(ts)?;
    let lower = rational_from(ts.last().c as i128) / arith::one_minus(&report.higher);
    let hyperperiod = arith::lcm_capped(ts.periods())?;
    Ok((lower, hyperperiod))
}

/// One certified inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
}

/// Check the interval-width guarantees of the bounds:
/// `u1 - ell <= p_max^n` always, and `u1 - ell <= p_max^2`, `u1 <= 2 p_max^2`
/// when the whole system has utilization at most 1.
pub fn interval_width_certificates(ts: &TaskSystem) -> Result<Vec<Certificate>> {
    let bounds = response_bounds(ts)?;
    let report = model::check_general_utilization_bound(ts)?;
    let p_max = BigInt::from(ts.tasks.iter().map(|t| t.p).max().unwrap_or(1));
    let width = &bounds.u1 - &bounds.ell;

    let mut checks: Vec<(&'static str, Rational, Rational)> =
        vec![("u1 - ell <= p_max^n", width.clone(), Rational::from_integer(Pow::pow(&p_max, ts.len() as u32)))];
    if report.schedulability_bound_holds {
        let sq = Rational::from_integer(&p_max * &p_max);
        checks.push(("u1 - ell <= p_max^2", width, sq.clone()));
        checks.push(("u1 <= 2 p_max^2", bounds.u1.clone(), sq * rational_from(2)));
    }

    let mut out = Vec::with_capacity(checks.len());
    for (name, lhs, rhs) in checks {
        if lhs > rhs {
            return Err(Error::InternalInvariantViolated(format!("{name}: {lhs} > {rhs}")));
        }
        out.push(Certificate { name, lhs: lhs.to_string(), rhs: rhs.to_string() });
    }
    Ok(out)
}
