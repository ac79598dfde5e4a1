//! Mixing Set through response-time computations.
//!
//! With `b_i = β + ξ_i`, `0 <= ξ_i <= a_i` and `β` at least the bound on the
//! optimal `s`, `Mix(β) <= k` holds iff `response(I, β - k) <= β` for the
//! tasks `(c, p, ξ) = (w_i, a_i, ξ_i)`. Any instance can be brought into
//! that crowded shape by shifting each `b_i` by a multiple of `a_i`.

use serde::Serialize;

use crate::arith::{self, ceil_div};
use crate::error::{Error, Result};
use crate::mixing::{self, MixInstance, MixSolution, MixTerm};
use crate::model::Task;
use crate::rta::{self, Algorithm, ResponseQuery};

/// Per-term shift moving every right-hand side into `[m, m + a_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftRecord {
    pub m: i64,
    pub offsets: Vec<i64>,
    pub objective_correction: i64,
}

impl ShiftRecord {
    pub fn new(inst: &MixInstance) -> Result<Self> {
        let m = inst.lcm()?;
        let offsets = inst
            .terms
            .iter()
            .map(|t| arith::to_capped_i64(ceil_div(m as i128 - t.b as i128, t.a as i128), "offset"))
            .collect::<Result<Vec<_>>>()?;
        let correction: i128 = inst.terms.iter().zip(&offsets).map(|(t, &o)| t.w as i128 * o as i128).sum();
        let objective_correction = arith::to_capped_i64(correction, "objective correction")?;
        Ok(ShiftRecord { m, offsets, objective_correction })
    }

    /// The instance with `b'_i = b_i + offset_i · a_i`.
    pub fn apply(&self, inst: &MixInstance) -> Result<MixInstance> {
        let terms = inst
            .terms
            .iter()
            .zip(&self.offsets)
            .map(|(t, &o)| {
                let b = arith::to_capped_i64(t.b as i128 + o as i128 * t.a as i128, "shifted b")?;
                Ok(MixTerm { b, ..*t })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MixInstance::new(inst.w0, terms))
    }
}

fn require_unit_w0(inst: &MixInstance) -> Result<()> {
    inst.validate()?;
    if inst.w0 != 1 {
        return Err(Error::Precondition(format!("w0 = {} but the reverse reduction needs w0 = 1", inst.w0)));
    }
    Ok(())
}

/// Tasks `(w_i, a_i, b_i - β)`; zero-weight terms never constrain `t` and are dropped.
fn encode(inst: &MixInstance, beta: i64) -> Result<Vec<Task>> {
    let mut tasks = Vec::with_capacity(inst.terms.len());
    for (i, t) in inst.terms.iter().enumerate() {
        let jitter = t.b - beta;
        if jitter < 0 || jitter > t.a {
            return Err(Error::Precondition(format!("term {i}: b - β = {jitter} is outside [0, a = {}]", t.a)));
        }
        if t.w > 0 {
            tasks.push(Task::rtc(t.w, t.a, jitter));
        }
    }
    Ok(tasks)
}

/// Least `t` with `t >= γ + ∑ c⌈(t + ξ)/p⌉` if it is at most `horizon`.
/// Uses the exact response algorithms where their preconditions hold and
/// the bounded fixed point otherwise (`γ <= 0` or utilization exactly 1).
fn response_within(q: &ResponseQuery, horizon: i64) -> Result<Option<i64>> {
    if q.validate().is_ok() {
        let (r, _) = rta::response(q, Algorithm::Auto)?;
        return Ok((r <= horizon).then_some(r));
    }
    Ok(rta::response_bounded(q, horizon))
}

/// Decide `Mix(β) <= k` by computing `response(I, β - k)` and comparing to `β`.
pub fn mix_leq_via_rtc(inst: &MixInstance, beta: i64, k: i64) -> Result<bool> {
    require_unit_w0(inst)?;
    let tasks = encode(inst, beta)?;
    let bound = mixing::s_search_bound(inst)?;
    if beta < bound {
        return Err(Error::PreconditionKTooSmall { k: beta, bound });
    }
    let q = ResponseQuery::new(tasks, beta - k);
    Ok(response_within(&q, beta)?.is_some())
}

/// Binary search the optimum over `[0, β_max]` and recover `s = β - t`
/// from the response time at the optimal `k`.
fn solve_by_search(inst: &MixInstance, beta: i64, hi: i64) -> Result<MixSolution> {
    let tasks = encode(inst, beta)?;
    let decide =
        |k: i64| -> Result<Option<i64>> { response_within(&ResponseQuery::new(tasks.clone(), beta - k), beta) };
    let (mut lo, mut hi) = (0i64, hi);
    if decide(hi)?.is_none() {
        return Err(Error::InternalInvariantViolated(format!("Mix(β) <= {hi} fails for a crowded instance")));
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if decide(mid)?.is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = decide(hi)?.expect("decided feasible above");
    let sol = mixing::complete(beta - t, inst)?;
    if sol.objective != hi {
        return Err(Error::InternalInvariantViolated(format!(
            "recovered s = {} has objective {}, expected {hi}",
            sol.s, sol.objective
        )));
    }
    Ok(sol)
}

/// Instances with `lcm(a) <= b_i <= b_min + a_i` for all `i`.
pub fn solve_crowded(inst: &MixInstance) -> Result<MixSolution> {
    require_unit_w0(inst)?;
    if inst.terms.is_empty() {
        return mixing::complete(0, inst);
    }
    let m = inst.lcm()?;
    let b_min = inst.terms.iter().map(|t| t.b).min().unwrap();
    let b_max = inst.terms.iter().map(|t| t.b).max().unwrap();
    for (i, t) in inst.terms.iter().enumerate() {
        if t.b < m || t.b > b_min + t.a {
            return Err(Error::Precondition(format!(
                "term {i}: b = {} is not within [lcm = {m}, b_min + a = {}]",
                t.b,
                b_min + t.a
            )));
        }
    }
    if mixing::is_unbounded(inst) {
        return Err(Error::Unbounded);
    }
    solve_by_search(inst, b_min, b_max)
}

/// Shift into the crowded shape, solve there and undo the shift.
pub fn solve_general_via_shift(inst: &MixInstance) -> Result<MixSolution> {
    require_unit_w0(inst)?;
    if mixing::is_unbounded(inst) {
        return Err(Error::Unbounded);
    }
    let shift = ShiftRecord::new(inst)?;
    let shifted = shift.apply(inst)?;
    let sol = solve_crowded(&shifted)?;
    let x = sol.x.iter().zip(&shift.offsets).map(|(&x, &o)| x - o).collect();
    let objective = sol.objective - shift.objective_correction;
    let out = MixSolution { s: sol.s, x, objective };
    mixing::check_solution(inst, &out)?;
    Ok(out)
}

/// Instances with every `b_i = β`, through jitter-free response times.
/// Harmonic capacities need `β >= a_max`, others `β >= lcm`.
pub fn solve_constant_beta(inst: &MixInstance, beta: i64) -> Result<MixSolution> {
    require_unit_w0(inst)?;
    if let Some(t) = inst.terms.iter().find(|t| t.b != beta) {
        return Err(Error::Precondition(format!("b = {} differs from β = {beta}", t.b)));
    }
    if inst.terms.is_empty() {
        return mixing::complete(0, inst);
    }
    let need = if inst.is_harmonic() { inst.terms.iter().map(|t| t.a).max().unwrap() } else { inst.lcm()? };
    if beta < need {
        return Err(Error::Precondition(format!("β = {beta} is below the required {need}")));
    }
    if mixing::is_unbounded(inst) {
        return Err(Error::Unbounded);
    }
    // (s = β, x = 0) is feasible with value β
    solve_by_search(inst, beta, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mix(w: &[i64], a: &[i64], b: &[i64]) -> MixInstance {
        MixInstance::from_parts(1, w, a, b)
    }

    fn brute(inst: &MixInstance) -> i64 {
        mixing::solve_bruteforce(inst).unwrap().objective
    }

    #[test]
    fn leq_examples() {
        let inst = mix(&[1, 1], &[2, 4], &[4, 4]);
        assert_eq!(brute(&inst), 3);
        assert!(mix_leq_via_rtc(&inst, 4, 3).unwrap());
        assert!(!mix_leq_via_rtc(&inst, 4, 2).unwrap());
        let empty = MixInstance::new(1, vec![]);
        assert!(mix_leq_via_rtc(&empty, 5, 4).unwrap());
        assert!(matches!(mix_leq_via_rtc(&inst, 9, 3), Err(Error::Precondition(_))));
        assert!(matches!(
            mix_leq_via_rtc(&MixInstance::from_parts(2, &[1], &[2], &[2]), 2, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn crowded_examples() {
        for inst in [mix(&[1, 1], &[2, 4], &[4, 5]), mix(&[1, 1], &[2, 4], &[4, 4]), mix(&[2, 1], &[3, 9], &[9, 11])] {
            let sol = solve_crowded(&inst).unwrap();
            assert_eq!(sol.objective, brute(&inst));
            assert!(inst.is_feasible(sol.s, &sol.x));
        }
        assert!(matches!(solve_crowded(&mix(&[1], &[4], &[1])), Err(Error::Precondition(_))));
    }

    #[test]
    fn shift_examples() {
        let inst = mix(&[1, 2], &[2, 4], &[-3, 1]);
        assert_eq!(solve_general_via_shift(&inst).unwrap().objective, brute(&inst));
        let single = mix(&[1], &[5], &[0]);
        assert_eq!(solve_general_via_shift(&single).unwrap().objective, brute(&single));

        let crowded = mix(&[1, 1], &[2, 4], &[4, 5]);
        let rec = ShiftRecord::new(&crowded).unwrap();
        assert_eq!(rec.m, 4);
        assert_eq!(rec.offsets, vec![0, 0]);
        assert_eq!(rec.objective_correction, 0);
    }

    #[test]
    fn constant_beta_examples() {
        let inst = mix(&[1, 1], &[2, 4], &[4, 4]);
        assert_eq!(solve_constant_beta(&inst, 4).unwrap().objective, 3);
        let zero_weight = mix(&[0], &[6], &[6]);
        assert_eq!(solve_constant_beta(&zero_weight, 6).unwrap().objective, brute(&zero_weight));
        assert_eq!(brute(&zero_weight), 0);
        let empty = MixInstance::new(1, vec![]);
        let sol = solve_constant_beta(&empty, 10).unwrap();
        assert_eq!((sol.s, sol.objective), (0, 0));
        assert!(matches!(solve_constant_beta(&inst, 3), Err(Error::Precondition(_))));
    }

    fn bounded_instance() -> impl Strategy<Value = MixInstance> {
        prop::collection::vec((0i64..=6, 1i64..=12, -40i64..=40), 0..5).prop_map(|raw| {
            let mut terms: Vec<MixTerm> = raw.iter().map(|&(w, a, b)| MixTerm { w, a, b }).collect();
            let mut inst = MixInstance::new(1, terms.clone());
            while mixing::is_unbounded(&inst) {
                terms.pop();
                inst = MixInstance::new(1, terms.clone());
            }
            inst
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn shift_path_matches_bruteforce(inst in bounded_instance()) {
            let rec = ShiftRecord::new(&inst).unwrap();
            let shifted = rec.apply(&inst).unwrap();
            for t in &shifted.terms {
                prop_assert!(rec.m <= t.b && t.b <= rec.m + t.a);
            }
            prop_assert_eq!(brute(&shifted) - rec.objective_correction, brute(&inst));
            let sol = solve_general_via_shift(&inst).unwrap();
            prop_assert_eq!(sol.objective, brute(&inst));
            prop_assert!(inst.is_feasible(sol.s, &sol.x));
        }

        #[test]
        fn constant_beta_matches_bruteforce(inst in bounded_instance(), extra in 0i64..20) {
            let Ok(m) = inst.lcm() else { return Ok(()) };
            let beta = m + extra;
            let inst = MixInstance::new(1, inst.terms.iter().map(|t| MixTerm { b: beta, ..*t }).collect());
            prop_assert_eq!(solve_constant_beta(&inst, beta).unwrap().objective, brute(&inst));
        }

        #[test]
        fn leq_is_monotone(inst in bounded_instance()) {
            let shifted = ShiftRecord::new(&inst).unwrap().apply(&inst).unwrap();
            let Some(beta) = shifted.terms.iter().map(|t| t.b).min() else { return Ok(()) };
            if shifted.terms.iter().any(|t| t.b > beta + t.a) {
                return Ok(());
            }
            let opt = brute(&shifted);
            let b_max = shifted.terms.iter().map(|t| t.b).max().unwrap();
            let verdicts: Vec<bool> = (0..=b_max).map(|k| mix_leq_via_rtc(&shifted, beta, k).unwrap()).collect();
            prop_assert!(verdicts.windows(2).all(|w| w[0] <= w[1]));
            for (k, v) in verdicts.iter().enumerate() {
                prop_assert_eq!(*v, opt <= k as i64);
            }
        }
    }
}
