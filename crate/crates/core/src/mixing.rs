//! The Mixing Set integer program
//!
//! ```text
//! min  w0·s + ∑ w_i x_i   s.t.  s + a_i x_i >= b_i,  s ∈ ℤ≥0,  x ∈ ℤⁿ
//! ```
//!
//! For a fixed `s` the pointwise-minimal feasible completion is
//! `x_i(s) = ⌈(b_i - s)/a_i⌉`, so every solver here searches over `s` only.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{self, ceil_div, ratio, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixTerm {
    pub w: i64,
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixInstance {
    pub w0: i64,
    pub terms: Vec<MixTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixSolution {
    pub s: i64,
    pub x: Vec<i64>,
    pub objective: i64,
}

impl MixInstance {
    pub fn new(w0: i64, terms: Vec<MixTerm>) -> Self {
        MixInstance { w0, terms }
    }

    /// Build from parallel weight, capacity and right-hand-side slices.
    pub fn from_parts(w0: i64, w: &[i64], a: &[i64], b: &[i64]) -> Self {
        assert!(w.len() == a.len() && a.len() == b.len());
        let terms = w.iter().zip(a).zip(b).map(|((&w, &a), &b)| MixTerm { w, a, b }).collect();
        MixInstance { w0, terms }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w0 < 0 {
            return Err(Error::InvalidInstance(format!("w0 = {} is negative", self.w0)));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.a < 1 {
                return Err(Error::InvalidInstance(format!("term {i}: capacity a = {} < 1", t.a)));
            }
            if t.w < 0 {
                return Err(Error::InvalidInstance(format!("term {i}: weight w = {} < 0", t.w)));
            }
        }
        Ok(())
    }

    pub fn capacities(&self) -> Vec<i64> {
        self.terms.iter().map(|t| t.a).collect()
    }

    pub fn is_harmonic(&self) -> bool {
        arith::is_harmonic_values(&self.capacities())
    }

    /// `∑ w_i / a_i`.
    pub fn weight_ratio(&self) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, t| acc + ratio(t.w, t.a))
    }

    pub fn lcm(&self) -> Result<i64> {
        arith::lcm_capped(self.terms.iter().map(|t| t.a))
    }

    /// Objective of the canonical completion of `s`, in wide arithmetic.
    pub fn objective_at(&self, s: i64) -> i128 {
        arith::count(self.terms.len() as u64 + 1);
        let s = s as i128;
        self.w0 as i128 * s
            + self.terms.iter().map(|t| t.w as i128 * ceil_div(t.b as i128 - s, t.a as i128)).sum::<i128>()
    }

    /// True iff `(s, x)` satisfies every constraint.
    pub fn is_feasible(&self, s: i64, x: &[i64]) -> bool {
        s >= 0
            && x.len() == self.terms.len()
            && self.terms.iter().zip(x).all(|(t, &xi)| s as i128 + t.a as i128 * xi as i128 >= t.b as i128)
    }
}

/// Canonical completion of `s`.
pub fn complete(s: i64, inst: &MixInstance) -> Result<MixSolution> {
    if s < 0 {
        return Err(Error::Precondition(format!("s = {s} is negative")));
    }
    let x = inst
        .terms
        .iter()
        .map(|t| arith::to_capped_i64(ceil_div(t.b as i128 - s as i128, t.a as i128), "x_i"))
        .collect::<Result<Vec<_>>>()?;
    let objective = arith::to_capped_i64(inst.objective_at(s), "objective")?;
    Ok(MixSolution { s, x, objective })
}

/// True iff `∑ w_i / a_i > w0`, in which case shifting `s` by the lcm
/// improves any solution without end.
pub fn is_unbounded(inst: &MixInstance) -> bool {
    inst.weight_ratio() > Rational::from_integer(inst.w0.into())
}

/// An integer `S` such that some optimal solution has `s <= S`.
///
/// Always `lcm(a) - 1`; when `∑ w_i/a_i < w0` and `w0 >= 1` this is
/// intersected with `⌈∑ w_i / (w0 - ∑ w_i/a_i)⌉`.
pub fn s_search_bound(inst: &MixInstance) -> Result<i64> {
    inst.validate()?;
    if is_unbounded(inst) {
        return Err(Error::Unbounded);
    }
    let ratio_sum = inst.weight_ratio();
    let w0 = Rational::from_integer(inst.w0.into());
    let util_bound = if inst.w0 >= 1 && ratio_sum < w0 {
        let total: i128 = inst.terms.iter().map(|t| t.w as i128).sum();
        let b = arith::rational_ceil(&(arith::rational_from(total) / (w0 - ratio_sum)));
        arith::bigint_to_capped(&b, "utilization bound on s").ok()
    } else {
        None
    };
    match (inst.lcm(), util_bound) {
        (Ok(m), Some(u)) => Ok((m - 1).min(u)),
        (Ok(m), None) => Ok(m - 1),
        (Err(_), Some(u)) => Ok(u),
        (Err(e), None) => Err(e),
    }
}

/// Exhaustive optimum over `s ∈ [0, s_search_bound]`, smallest `s` on ties.
pub fn solve_bruteforce(inst: &MixInstance) -> Result<MixSolution> {
    let bound = s_search_bound(inst)?;
    let mut best = (inst.objective_at(0), 0i64);
    for s in 1..=bound {
        let v = inst.objective_at(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    complete(best.1, inst)
}

/// Exact optimum by evaluating `s = 0` and every breakpoint
/// `s ≡ b_i (mod a_i)` up to the search bound. The smallest optimal `s`
/// is always among these candidates.
pub fn solve_breakpoints(inst: &MixInstance) -> Result<MixSolution> {
    let bound = s_search_bound(inst)?;
    let mut candidates = vec![0i64];
    for t in &inst.terms {
        let mut s = t.b.rem_euclid(t.a);
        while s <= bound {
            candidates.push(s);
            s += t.a;
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let best = candidates.into_iter().map(|s| (inst.objective_at(s), s)).min().expect("0 is always a candidate");
    complete(best.1, inst)
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| Error::OverflowLimit("harmonic solver intermediate overflow".into()))
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(|| Error::OverflowLimit("harmonic solver intermediate overflow".into()))
}

/// Choice table of one eliminated level: for `ρ` in the `j`-th interval cut
/// by `thresholds`, the best next digit is `digits[j]`.
struct LevelChoice {
    thresholds: Vec<i128>,
    digits: Vec<i128>,
    step: i128,
}

/// Optimum for harmonic capacities in `O(L·n²)` counted operations, where
/// `L <= log₂(a_max) + 1` is the number of distinct capacities.
///
/// Capacities `c_1 | c_2 | … | c_L` are eliminated from the top. Writing
/// `ρ_ℓ = s mod c_ℓ = ρ_{ℓ-1} + D·c_{ℓ-1}`, every term at the top level
/// depends on `ρ_{ℓ-1}` only through `[ρ_{ℓ-1} < b mod c_{ℓ-1}]`, so the
/// minimum over the digit `D ∈ [0, c_ℓ/c_{ℓ-1})` is a nonincreasing step
/// function of `ρ_{ℓ-1}`. That step function is itself a sum of terms
/// `β·⌈(r - ρ)/c_{ℓ-1}⌉` with `β >= 0`, which join the next level down.
///
/// Ties are resolved towards the smallest `s` by solving the perturbed
/// objective `(w0·B + 1)·s + ∑ B·w_i x_i` with `B = lcm`, whose minimizer in
/// `[0, B)` is unique.
pub fn solve_harmonic(inst: &MixInstance) -> Result<MixSolution> {
    inst.validate()?;
    if !inst.is_harmonic() {
        return Err(Error::Precondition("capacities are not harmonic".into()));
    }
    if is_unbounded(inst) {
        return Err(Error::Unbounded);
    }
    if inst.terms.is_empty() {
        return complete(0, inst);
    }

    let scale = inst.lcm()? as i128;
    let w0 = add(mul(inst.w0 as i128, scale)?, 1)?;
    let mut caps: Vec<i128> = inst.terms.iter().map(|t| t.a as i128).collect();
    caps.sort_unstable();
    caps.dedup();

    // scaled original terms grouped by capacity level
    let mut by_level: Vec<Vec<(i128, i128)>> = vec![Vec::new(); caps.len()];
    for t in &inst.terms {
        let level = caps.binary_search(&(t.a as i128)).expect("capacity present");
        by_level[level].push((mul(t.w as i128, scale)?, t.b as i128));
    }
    // λ_ℓ = c_ℓ·(w0 - ∑_{a_i <= c_ℓ} w_i / a_i), an integer since a_i | c_ℓ
    let mut slope = Vec::with_capacity(caps.len());
    for (level, &c) in caps.iter().enumerate() {
        let mut v = mul(c, w0)?;
        for (lower, group) in by_level[..=level].iter().enumerate() {
            for &(w, _) in group {
                v -= mul(w, c / caps[lower])?;
            }
        }
        slope.push(v);
    }

    let mut constant: i128 = 0;
    let mut group: Vec<(i128, i128)> = by_level[caps.len() - 1].clone();
    let mut choices: Vec<LevelChoice> = Vec::new();

    for level in (1..caps.len()).rev() {
        let below = caps[level - 1];
        let radix = caps[level] / below;
        let lambda = slope[level - 1];

        // (weight, E_k, R_k) with b = E·below + R
        let mut parts: Vec<(i128, i128, i128)> = group
            .iter()
            .filter(|&&(w, _)| w != 0)
            .map(|&(w, b)| (w, b.div_euclid(below), b.rem_euclid(below)))
            .collect();
        parts.sort_by_key(|p| p.2);
        let mut thresholds: Vec<i128> = parts.iter().map(|p| p.2).filter(|&r| r > 0).collect();
        thresholds.dedup();

        let mut candidates: Vec<i128> = vec![0];
        for &(_, e, _) in &parts {
            candidates.push(e.rem_euclid(radix));
            candidates.push((e + 1).rem_euclid(radix));
        }
        candidates.sort_unstable();
        candidates.dedup();

        let intervals = thresholds.len() + 1;
        let mut best: Vec<Option<(i128, i128)>> = vec![None; intervals];
        for &digit in &candidates {
            arith::count(parts.len() as u64 + intervals as u64);
            // cost with e_k = E_k + [R_k > 0], then sweep thresholds upwards
            let mut cost = mul(lambda, digit)?;
            for &(w, e, r) in &parts {
                let ek = e + i128::from(r > 0);
                cost = add(cost, mul(w, ceil_div(ek - digit, radix))?)?;
            }
            let mut next = 0usize;
            for (j, slot) in best.iter_mut().enumerate() {
                if j > 0 {
                    let thr = thresholds[j - 1];
                    while next < parts.len() && parts[next].2 <= thr {
                        let (w, e, r) = parts[next];
                        if r == thr {
                            let drop = ceil_div(e + 1 - digit, radix) - ceil_div(e - digit, radix);
                            cost -= mul(w, drop)?;
                        }
                        next += 1;
                    }
                }
                if slot.is_none_or(|(c, _)| cost < c) {
                    *slot = Some((cost, digit));
                }
            }
        }

        let phi: Vec<i128> = best.iter().map(|b| b.expect("candidate set nonempty").0).collect();
        let digits: Vec<i128> = best.iter().map(|b| b.unwrap().1).collect();
        constant = add(constant, phi[intervals - 1])?;

        let mut next_group: Vec<(i128, i128)> = by_level[level - 1].clone();
        for (j, &thr) in thresholds.iter().enumerate() {
            let weight = phi[j] - phi[j + 1];
            if weight < 0 {
                return Err(Error::InternalInvariantViolated(
                    "eliminated level is not a nonincreasing step function".into(),
                ));
            }
            if weight > 0 {
                next_group.push((weight, thr));
            }
        }
        group = next_group;
        choices.push(LevelChoice { thresholds, digits, step: below });
    }

    // bottom level: ρ ∈ [0, c_1), candidates 0 and every b mod c_1
    let base = caps[0];
    let mut candidates: Vec<i128> = std::iter::once(0).chain(group.iter().map(|&(_, b)| b.rem_euclid(base))).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut bottom: Option<(i128, i128)> = None;
    for rho in candidates {
        arith::count(group.len() as u64 + 1);
        let mut v = mul(w0, rho)?;
        for &(w, b) in &group {
            v = add(v, mul(w, ceil_div(b - rho, base))?)?;
        }
        if bottom.is_none_or(|(bv, _)| v < bv) {
            bottom = Some((v, rho));
        }
    }
    let (value, mut rho) = bottom.expect("0 is always a candidate");
    let value = add(value, constant)?;

    for choice in choices.iter().rev() {
        let j = choice.thresholds.partition_point(|&t| t <= rho);
        rho += choice.digits[j] * choice.step;
    }

    let s = arith::to_capped_i64(rho, "s")?;
    let sol = complete(s, inst)?;
    let perturbed =
        mul(w0, rho)? + inst.terms.iter().zip(&sol.x).map(|(t, &x)| t.w as i128 * scale * x as i128).sum::<i128>();
    if perturbed != value {
        return Err(Error::InternalInvariantViolated(format!(
            "harmonic elimination value {value} disagrees with reconstructed s = {s} ({perturbed})"
        )));
    }
    Ok(sol)
}

/// Pick the exact solver suited to the capacities.
pub fn solve(inst: &MixInstance) -> Result<MixSolution> {
    if inst.is_harmonic() {
        solve_harmonic(inst)
    } else {
        solve_breakpoints(inst)
    }
}

/// Outcome of [`shift_identity_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftReport {
    pub m: i64,
    pub forward_checked: bool,
    pub backward_checked: bool,
}

/// Verify `x_i(s ± m) = x_i(s) ∓ m/a_i` for `m = lcm(a)`, skipping the
/// backward direction when `s < m`.
pub fn shift_identity_check(inst: &MixInstance, s: i64) -> Result<ShiftReport> {
    inst.validate()?;
    let m = inst.lcm()?;
    let base = complete(s, inst)?;
    let verify = |shifted: i64, sign: i64| -> Result<()> {
        let other = complete(shifted, inst)?;
        for (i, t) in inst.terms.iter().enumerate() {
            if other.x[i] != base.x[i] - sign * (m / t.a) {
                return Err(Error::InternalInvariantViolated(format!(
                    "shift identity fails for term {i} at s = {s}, shift {}",
                    sign * m
                )));
            }
        }
        Ok(())
    };
    let forward = s.checked_add(m).ok_or_else(|| Error::OverflowLimit("s + m overflows".into()))?;
    verify(forward, 1)?;
    let backward_checked = s >= m;
    if backward_checked {
        verify(s - m, -1)?;
    }
    Ok(ShiftReport { m, forward_checked: true, backward_checked })
}

/// Post-hoc check applied to every solver result.
pub fn check_solution(inst: &MixInstance, sol: &MixSolution) -> Result<()> {
    if !inst.is_feasible(sol.s, &sol.x) {
        return Err(Error::InternalInvariantViolated(format!("solution with s = {} is infeasible", sol.s)));
    }
    let obj = inst.w0 as i128 * sol.s as i128
        + inst.terms.iter().zip(&sol.x).map(|(t, &x)| t.w as i128 * x as i128).sum::<i128>();
    if obj != sol.objective as i128 {
        return Err(Error::InternalInvariantViolated("objective does not match solution".into()));
    }
    Ok(())
}
