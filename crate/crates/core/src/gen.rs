//! Instance generators: the full-utilization harmonic family, the tight
//! Mixing Set family and seeded random systems, mixing instances and
//! release patterns.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::mixing::{self, MixInstance, MixTerm};
use crate::model::{self, Task, TaskSystem};
use crate::sim::{JobRelease, ReleasePattern};

/// Release jitters for [`construct_extreme`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterPreset {
    /// `ξ_i = p_i`.
    Period,
    Zero,
    Explicit(Vec<i64>),
}

/// Extend `c_1 … c_{n-2}` and `p_1` to `n` tasks with harmonic periods,
/// utilization exactly 1, `c_n = 1` and `p_n = p_{n-1} = p_max`:
///
/// * `p_i = (c_i + 1)·p_{i-1}` for `2 <= i <= n-2`,
/// * `p_{n-1} = p_n = 2 p_{n-2}`,
/// * `c_{n-1} = 2 p_{n-2} (1 - ∑_{i<=n-2} c_i/p_i) - 1`.
///
/// Deadlines are set to the periods.
pub fn construct_extreme(c: &[i64], p1: i64, jitter: &JitterPreset) -> Result<TaskSystem> {
    if c.is_empty() {
        return Err(Error::Precondition("need at least one given cost (n >= 3)".into()));
    }
    if c.iter().any(|&ci| ci < 1) {
        return Err(Error::Precondition("costs must be at least 1".into()));
    }
    if p1 <= c[0] {
        return Err(Error::Precondition(format!("p1 = {p1} must exceed c1 = {}", c[0])));
    }
    let mut periods = vec![p1];
    for &ci in &c[1..] {
        let prev = *periods.last().unwrap() as i128;
        periods.push(arith::to_capped_i64((ci as i128 + 1) * prev, "period")?);
    }
    let last = *periods.last().unwrap();
    // 2·(p_{n-2} - ∑ c_i · p_{n-2}/p_i) - 1, integral by harmonicity
    let slack: i128 =
        last as i128 - c.iter().zip(&periods).map(|(&ci, &pi)| ci as i128 * (last / pi) as i128).sum::<i128>();
    let c_penult = arith::to_capped_i64(2 * slack - 1, "c_{n-1}")?;
    let p_top = arith::to_capped_i64(2 * last as i128, "p_{n-1}")?;

    let mut costs = c.to_vec();
    costs.extend([c_penult, 1]);
    periods.extend([p_top, p_top]);
    let n = costs.len();
    let jitters = match jitter {
        JitterPreset::Period => periods.clone(),
        JitterPreset::Zero => vec![0; n],
        JitterPreset::Explicit(v) => {
            if v.len() != n {
                return Err(Error::Precondition(format!("expected {n} jitters, got {}", v.len())));
            }
            v.clone()
        }
    };
    let ts = TaskSystem::new(
        costs.iter().zip(&periods).zip(&jitters).map(|((&c, &p), &j)| Task::new(c, Some(p), p, j)).collect(),
    );
    model::validate(&ts)?;
    if model::utilization(&ts, false) != arith::Rational::one() {
        return Err(Error::InternalInvariantViolated("constructed system is not fully utilized".into()));
    }
    Ok(ts)
}

/// `w_i = 2^i`, `a_i = n·2^i`, `b_i = n·2^n - 1` for `i = 1..n`, `w0 = 1`.
/// Its unique optimum is `s = lcm - 1 = n·2^n - 1`.
pub fn tight_mixing_instance(n: u32) -> Result<MixInstance> {
    if n < 2 {
        return Err(Error::Precondition(format!("n = {n} must be at least 2")));
    }
    if n > 56 {
        return Err(Error::OverflowLimit(format!("n·2^n overflows for n = {n}")));
    }
    let n64 = n as i64;
    let b = n64 * (1i64 << n) - 1;
    let terms = (1..=n).map(|i| MixTerm { w: 1 << i, a: n64 << i, b }).collect();
    Ok(MixInstance::new(1, terms))
}

/// How random systems draw jitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterMode {
    Zero,
    /// Uniform in `[0, p_i]`.
    UpToPeriod,
    /// `ξ_i = p_i`.
    Full,
}

const MAX_ATTEMPTS: usize = 1000;

/// A divisor chain of values in `[1, p_max]`, from a random base and
/// random factors in `2..=4`.
fn divisor_chain(rng: &mut ChaCha8Rng, p_max: i64) -> Vec<i64> {
    let mut v = rng.gen_range(1..=p_max.clamp(1, 4));
    let mut chain = vec![v];
    loop {
        let next = v * rng.gen_range(2..=4);
        if next > p_max {
            break;
        }
        v = next;
        chain.push(v);
    }
    chain
}

/// A seeded random system of `n` tasks with periods in `[1, p_max]` whose
/// higher-priority utilization is below 1. Harmonic systems draw every
/// period from one divisor chain. Deadlines equal periods.
pub fn random_system(seed: u64, n: usize, p_max: i64, harmonic: bool, jitter: JitterMode) -> Result<TaskSystem> {
    if n == 0 || p_max < 1 {
        return Err(Error::Precondition("need n >= 1 and p_max >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let chain = if harmonic { divisor_chain(&mut rng, p_max) } else { Vec::new() };
        let tasks: Vec<Task> = (0..n)
            .map(|_| {
                let p = if harmonic { chain[rng.gen_range(0..chain.len())] } else { rng.gen_range(1..=p_max) };
                let c_max = (2 * p / n as i64).clamp(1, p);
                let c = rng.gen_range(1..=c_max);
                let j = match jitter {
                    JitterMode::Zero => 0,
                    JitterMode::UpToPeriod => rng.gen_range(0..=p),
                    JitterMode::Full => p,
                };
                Task::new(c, Some(p), p, j)
            })
            .collect();
        let ts = TaskSystem::new(tasks);
        if model::utilization(&ts, true) < arith::Rational::one() {
            model::validate(&ts)?;
            return Ok(ts);
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_ATTEMPTS })
}

/// A seeded bounded Mixing Set instance. Capacities come from one divisor
/// chain when `harmonic`, and `w0` is the smallest integer keeping the
/// instance bounded (plus a random extra of 0 or 1).
pub fn random_mix(seed: u64, n: usize, a_max: i64, b_abs: i64, w_max: i64, harmonic: bool) -> Result<MixInstance> {
    if a_max < 1 || b_abs < 0 || w_max < 0 {
        return Err(Error::Precondition("need a_max >= 1, b_abs >= 0 and w_max >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = if harmonic { divisor_chain(&mut rng, a_max) } else { Vec::new() };
    let terms: Vec<MixTerm> = (0..n)
        .map(|_| MixTerm {
            w: rng.gen_range(0..=w_max),
            a: if harmonic { chain[rng.gen_range(0..chain.len())] } else { rng.gen_range(1..=a_max) },
            b: rng.gen_range(-b_abs..=b_abs),
        })
        .collect();
    let mut inst = MixInstance::new(0, terms);
    let w0 = arith::bigint_to_capped(&arith::rational_ceil(&inst.weight_ratio()), "w0")?;
    inst.w0 = w0 + rng.gen_range(0..=1);
    debug_assert!(!mixing::is_unbounded(&inst));
    Ok(inst)
}

/// A seeded legal release pattern covering `[0, horizon)`: consecutive
/// arrivals are `p_i` plus a random gap apart and each release lags its
/// arrival by a random amount in `[0, ξ_i]`.
pub fn random_release_pattern(seed: u64, ts: &TaskSystem, horizon: i64) -> ReleasePattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = ts
        .tasks
        .iter()
        .map(|t| {
            let mut out = Vec::new();
            let mut arrival = rng.gen_range(0..=t.p);
            while arrival < horizon {
                let release = arrival + rng.gen_range(0..=t.jitter);
                out.push(JobRelease { arrival, release });
                // bias towards dense patterns
                let gap = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..=t.p) };
                arrival += t.p + gap;
            }
            out
        })
        .collect();
    ReleasePattern { jobs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::bounds;
    use crate::rta::{self, ResponseQuery};
    use proptest::prelude::*;

    #[test]
    fn extreme_n3() {
        let ts = construct_extreme(&[1], 2, &JitterPreset::Period).unwrap();
        let cp: Vec<(i64, i64, i64)> = ts.tasks.iter().map(|t| (t.c, t.p, t.jitter)).collect();
        assert_eq!(cp, vec![(1, 2, 2), (1, 4, 4), (1, 4, 4)]);
    }

    #[test]
    fn extreme_n4() {
        let ts = construct_extreme(&[1, 1], 2, &JitterPreset::Zero).unwrap();
        assert_eq!(ts.periods(), vec![2, 4, 8, 8]);
        // c_3 = 8·(1 - 1/2 - 1/4) - 1
        assert_eq!(ts.tasks[2].c, 1);
        assert_eq!(model::utilization(&ts, false), ratio(1, 1));
        assert!(ts.is_jitter_free());
    }

    #[test]
    fn extreme_rejects_bad_input() {
        assert!(matches!(construct_extreme(&[2], 2, &JitterPreset::Zero), Err(Error::Precondition(_))));
        assert!(construct_extreme(&[1], 3, &JitterPreset::Explicit(vec![0, 0])).is_err());
        assert!(construct_extreme(&[1], 3, &JitterPreset::Explicit(vec![0, 0, 9])).is_err());
    }

    #[test]
    fn tight_instances() {
        let i2 = tight_mixing_instance(2).unwrap();
        assert_eq!(i2, MixInstance::from_parts(1, &[2, 4], &[4, 8], &[7, 7]));
        let i3 = tight_mixing_instance(3).unwrap();
        assert_eq!(i3.capacities(), vec![6, 12, 24]);
        assert!(i3.terms.iter().all(|t| t.b == 23));
        for n in 2..=10 {
            assert_eq!(tight_mixing_instance(n).unwrap().weight_ratio(), ratio(1, 1));
        }
        assert!(tight_mixing_instance(1).is_err());
    }

    #[test]
    fn tight_instances_are_tight() {
        for n in 2..=6 {
            let inst = tight_mixing_instance(n).unwrap();
            let target = n as i64 * (1 << n) - 1;
            for s in 0..target {
                assert!(inst.objective_at(s) > target as i128, "n = {n}, s = {s}");
            }
            assert_eq!(inst.objective_at(target), target as i128);
        }
    }

    #[test]
    fn random_examples() {
        let ts = random_system(1, 3, 16, true, JitterMode::UpToPeriod).unwrap();
        assert_eq!(ts.len(), 3);
        assert!(model::is_harmonic(&ts));
        assert!(ts.tasks.iter().all(|t| t.p <= 16));
        assert_eq!(ts, random_system(1, 3, 16, true, JitterMode::UpToPeriod).unwrap());
        assert!(random_system(2, 4, 30, false, JitterMode::Zero).unwrap().is_jitter_free());
        let ts = random_system(3, 4, 30, false, JitterMode::Full).unwrap();
        assert!(ts.tasks.iter().all(|t| t.jitter == t.p));
        assert_eq!(
            random_system(1, 3, 1, false, JitterMode::Zero),
            Err(Error::GenerationFailed { attempts: MAX_ATTEMPTS })
        );
    }

    #[test]
    fn random_mix_is_bounded() {
        for seed in 0..50 {
            let inst = random_mix(seed, 5, 32, 40, 8, seed % 2 == 0).unwrap();
            assert!(!mixing::is_unbounded(&inst));
            if seed % 2 == 0 {
                assert!(inst.is_harmonic());
            }
        }
    }

    proptest! {
        #[test]
        fn extreme_systems_are_tight(c in prop::collection::vec(1i64..=3, 1..=3), extra in 1i64..=3) {
            let p1 = c[0] + extra;
            let ts = construct_extreme(&c, p1, &JitterPreset::Period).unwrap();
            let n = ts.len();
            prop_assert_eq!(model::utilization(&ts, false), ratio(1, 1));
            prop_assert!(model::is_harmonic(&ts));
            prop_assert_eq!(ts.last().c, 1);
            prop_assert_eq!(ts.last().p, ts.tasks.iter().map(|t| t.p).max().unwrap());
            let b = bounds::response_bounds(&ts).unwrap();
            prop_assert_eq!(b.ell.clone(), arith::rational_from(b.u2 as i128));
            let q = ResponseQuery::for_task(&ts, n - 1).unwrap();
            prop_assert_eq!(rta::response_bruteforce(&q).unwrap(), b.u2);
        }

        #[test]
        fn random_systems_are_valid(seed in any::<u64>(), n in 1usize..=6, harmonic in any::<bool>()) {
            let ts = random_system(seed, n, 48, harmonic, JitterMode::UpToPeriod).unwrap();
            prop_assert!(model::validate(&ts).is_ok());
            prop_assert!(model::utilization(&ts, true) < arith::Rational::one());
            if harmonic {
                prop_assert!(model::is_harmonic(&ts));
            }
        }
    }
}
