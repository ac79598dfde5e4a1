use std::fmt::Write as _;

use rtmix_core::blockip::{self, SimpleFourBlock};
use rtmix_core::gen::{self, JitterMode, JitterPreset};
use rtmix_core::mixing::{self, MixInstance, MixSolution};
use rtmix_core::reverse;
use rtmix_core::rta::{self, Algorithm, ResponseQuery};
use rtmix_core::sim::{self, Measure, ReleasePattern};
use rtmix_core::{bounds, TaskSystem};
use serde_json::{json, Value};

use crate::report::{load, to_value, CliError, CliResult, Outcome, Report, Stopwatch, EXIT_NEGATIVE, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RtaAlgorithm {
    Auto,
    Harmonic,
    LcmScan,
    Turing,
    JitterFree,
    #[value(alias = "brute-force")]
    Bruteforce,
}

impl From<RtaAlgorithm> for Algorithm {
    fn from(a: RtaAlgorithm) -> Self {
        match a {
            RtaAlgorithm::Auto => Algorithm::Auto,
            RtaAlgorithm::Harmonic => Algorithm::Harmonic,
            RtaAlgorithm::LcmScan => Algorithm::LcmScan,
            RtaAlgorithm::Turing => Algorithm::Turing,
            RtaAlgorithm::JitterFree => Algorithm::JitterFree,
            RtaAlgorithm::Bruteforce => Algorithm::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MixAlgorithm {
    Auto,
    Harmonic,
    Breakpoints,
    Bruteforce,
    /// Crowded or constant-`b` instances through response times.
    ViaRtc,
    /// Shift into crowded form, then solve through response times.
    Shift,
}

fn outcome(report: Report, text: String, exit: i32) -> Outcome {
    Outcome { report: Some(report), raw: None, text, exit }
}

fn raw(value: Value) -> Outcome {
    let text = serde_json::to_string_pretty(&value).expect("serializable");
    Outcome { report: None, raw: Some(value), text, exit: EXIT_OK }
}

pub fn rta_compute(input: &str, alg: RtaAlgorithm, require_schedulable: bool, verify: bool) -> CliResult<Outcome> {
    let (ts, instance): (TaskSystem, Value) = load(input)?;
    let clock = Stopwatch::start();
    let report = rta::analyze_system(&ts, alg.into())?;
    let timings = clock.stop();

    let mut certificates = Vec::new();
    for j in 0..ts.len() {
        let b = ResponseQuery::for_task(&ts, j)?.bounds()?;
        certificates.push(json!({
            "name": "bounds",
            "task": j,
            "ell": b.ell.to_string(),
            "u1": b.u1.to_string(),
            "u2": b.u2,
            "u": b.u,
        }));
    }
    if let Ok(widths) = bounds::interval_width_certificates(&ts) {
        certificates.extend(widths.iter().map(to_value));
    }

    let mut verified = None;
    if verify {
        for t in &report.tasks {
            let oracle = rta::response_bruteforce(&ResponseQuery::for_task(&ts, t.index)?)?;
            if oracle != t.response {
                return Err(CliError::Mismatch(format!(
                    "task {}: {} gives {}, brute force {oracle}",
                    t.index,
                    t.algorithm.name(),
                    t.response
                )));
            }
        }
        verified = Some(true);
    }

    let mut text = String::new();
    for t in &report.tasks {
        let verdict = match t.schedulable {
            Some(true) => "meets deadline",
            Some(false) => "MISSES deadline",
            None => "no deadline",
        };
        let _ = writeln!(text, "task {}: response {} ({}, {verdict})", t.index, t.response, t.algorithm.name());
    }
    let exit = if require_schedulable && report.schedulable != Some(true) { EXIT_NEGATIVE } else { EXIT_OK };
    let algorithms: Vec<&str> = report.tasks.iter().map(|t| t.algorithm.name()).collect();
    let algorithm = Some(if algorithms.windows(2).all(|w| w[0] == w[1]) {
        algorithms.first().copied().unwrap_or(Algorithm::from(alg).name()).to_string()
    } else {
        algorithms.join(",")
    });
    Ok(outcome(Report { result: to_value(&report), algorithm, certificates, timings, instance, verified }, text, exit))
}

fn solve_mix(inst: &MixInstance, alg: MixAlgorithm) -> CliResult<(MixSolution, &'static str)> {
    Ok(match alg {
        MixAlgorithm::Auto if inst.is_harmonic() => (mixing::solve_harmonic(inst)?, "harmonic"),
        MixAlgorithm::Auto | MixAlgorithm::Breakpoints => (mixing::solve_breakpoints(inst)?, "breakpoints"),
        MixAlgorithm::Harmonic => (mixing::solve_harmonic(inst)?, "harmonic"),
        MixAlgorithm::Bruteforce => (mixing::solve_bruteforce(inst)?, "bruteforce"),
        MixAlgorithm::Shift => (reverse::solve_general_via_shift(inst)?, "shift"),
        MixAlgorithm::ViaRtc => match inst.terms.first().map(|t| t.b) {
            Some(beta) if inst.terms.iter().all(|t| t.b == beta) => {
                (reverse::solve_constant_beta(inst, beta)?, "via-rtc-constant-beta")
            }
            _ => (reverse::solve_crowded(inst)?, "via-rtc-crowded"),
        },
    })
}

pub fn mix_solve(input: &str, alg: MixAlgorithm, verify: bool) -> CliResult<Outcome> {
    let (inst, instance): (MixInstance, Value) = load(input)?;
    let clock = Stopwatch::start();
    let (sol, used) = solve_mix(&inst, alg)?;
    let timings = clock.stop();
    mixing::check_solution(&inst, &sol)?;

    let mut certificates = vec![json!({ "name": "feasible", "s": sol.s, "x": sol.x })];
    if let Ok(bound) = mixing::s_search_bound(&inst) {
        certificates.push(json!({ "name": "s_search_bound", "lhs": sol.s, "rhs": bound }));
    }
    let mut verified = None;
    if verify {
        let oracle = mixing::solve_bruteforce(&inst)?;
        if oracle.objective != sol.objective {
            return Err(CliError::Mismatch(format!(
                "{used} gives {}, brute force {}",
                sol.objective, oracle.objective
            )));
        }
        verified = Some(true);
    }
    let text = format!("objective {} at s = {}, x = {:?} ({used})\n", sol.objective, sol.s, sol.x);
    let report =
        Report { result: to_value(&sol), algorithm: Some(used.into()), certificates, timings, instance, verified };
    Ok(outcome(report, text, EXIT_OK))
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<i64>> {
    s.split(',').map(|v| v.trim().parse::<i64>().map_err(|e| CliError::Input(format!("{what}: {v:?}: {e}")))).collect()
}

pub fn gen_extreme(n: usize, p1: i64, c: &str, jitter: &str) -> CliResult<Outcome> {
    if n < 3 {
        return Err(CliError::Input(format!("n = {n} must be at least 3")));
    }
    let mut costs = parse_list(c, "--c")?;
    if costs.len() == 1 {
        costs = vec![costs[0]; n - 2];
    }
    if costs.len() != n - 2 {
        return Err(CliError::Input(format!("--c needs 1 or {} values, got {}", n - 2, costs.len())));
    }
    let preset = match jitter {
        "p" | "period" => JitterPreset::Period,
        "0" | "zero" => JitterPreset::Zero,
        other => JitterPreset::Explicit(parse_list(other, "--jitter")?),
    };
    Ok(raw(to_value(&gen::construct_extreme(&costs, p1, &preset)?)))
}

pub fn gen_tight_mix(n: u32) -> CliResult<Outcome> {
    Ok(raw(to_value(&gen::tight_mixing_instance(n)?)))
}

pub fn gen_random(seed: u64, n: usize, p_max: i64, harmonic: bool, jitter: JitterMode) -> CliResult<Outcome> {
    Ok(raw(to_value(&gen::random_system(seed, n, p_max, harmonic, jitter)?)))
}

pub fn gen_random_mix(seed: u64, n: usize, a_max: i64, b_abs: i64, w_max: i64, harmonic: bool) -> CliResult<Outcome> {
    Ok(raw(to_value(&gen::random_mix(seed, n, a_max, b_abs, w_max, harmonic)?)))
}

pub fn gen_releases(input: &str, horizon: i64, seed: u64) -> CliResult<Outcome> {
    let (ts, _): (TaskSystem, Value) = load(input)?;
    rtmix_core::model::validate(&ts)?;
    Ok(raw(to_value(&gen::random_release_pattern(seed, &ts, horizon))))
}

pub fn sim_run(input: &str, releases: &str, horizon: i64, gantt: bool, measure: Measure) -> CliResult<Outcome> {
    let (ts, instance): (TaskSystem, Value) = load(input)?;
    let (rp, pattern): (ReleasePattern, Value) = load(releases)?;
    let clock = Stopwatch::start();
    let trace = sim::simulate(&ts, &rp, horizon)?;
    let timings = clock.stop();
    let responses = sim::observed_responses(&trace, measure);

    let mut worst = vec![None::<i64>; ts.len()];
    for r in &responses {
        worst[r.task] = Some(worst[r.task].map_or(r.response, |w| w.max(r.response)));
    }
    let chart = gantt.then(|| sim::render_gantt(&ts, &trace));
    let mut text = String::new();
    for (i, w) in worst.iter().enumerate() {
        match w {
            Some(w) => writeln!(text, "task {i}: worst observed response {w}"),
            None => writeln!(text, "task {i}: no jobs"),
        }
        .expect("write to string");
    }
    if let Some(c) = &chart {
        text.push_str(c);
    }
    let result = json!({
        "trace": trace,
        "responses": responses,
        "worst": worst,
        "gantt": chart,
    });
    let report = Report {
        result,
        algorithm: Some("simulation".into()),
        certificates: Vec::new(),
        timings,
        instance: json!({ "system": instance, "releases": pattern, "horizon": horizon }),
        verified: None,
    };
    Ok(outcome(report, text, EXIT_OK))
}

/// Exhaustive minimum of `wᵀx` over the box, if the box has at most `limit` points.
fn blockip_bruteforce(p: &SimpleFourBlock, limit: u128) -> Option<Option<i64>> {
    let size = p.u.iter().try_fold(1u128, |acc, &u| acc.checked_mul(u.max(0) as u128 + 1))?;
    if size > limit {
        return None;
    }
    let mut x = vec![0i64; p.num_vars()];
    let mut best: Option<i64> = None;
    loop {
        if p.is_feasible(&x) {
            let v: i64 = p.w.iter().zip(&x).map(|(w, x)| w * x).sum();
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        let Some(i) = (0..x.len()).find(|&i| x[i] < p.u[i]) else { break };
        x[i] += 1;
        x[..i].iter_mut().for_each(|v| *v = 0);
    }
    Some(best)
}

pub fn blockip_solve(input: &str, h: Option<i64>, budget: u64, verify: bool) -> CliResult<Outcome> {
    let (p, instance): (SimpleFourBlock, Value) = load(input)?;
    p.validate()?;
    let h = h.unwrap_or_else(|| p.default_h());
    let clock = Stopwatch::start();
    let value = blockip::solve_simple_4block(&p, h, budget)?;
    let timings = clock.stop();

    let mut certificates = vec![json!({ "name": "search_range", "lhs": -h, "rhs": h })];
    let mut verified = None;
    if verify {
        match blockip_bruteforce(&p, 5_000_000) {
            Some(Some(oracle)) if oracle == value => verified = Some(true),
            Some(oracle) => {
                return Err(CliError::Mismatch(format!("desk solver gives {value}, enumeration {oracle:?}")));
            }
            None => certificates.push(json!({ "name": "verify_skipped", "reason": "box too large to enumerate" })),
        }
    }
    let text = format!("objective {value}\n");
    let report = Report {
        result: json!({ "objective": value, "h": h }),
        algorithm: Some("desk".into()),
        certificates,
        timings,
        instance,
        verified,
    };
    Ok(outcome(report, text, EXIT_OK))
}

pub fn blockip_encode_rtc(input: &str) -> CliResult<Outcome> {
    let (ts, _): (TaskSystem, Value) = load(input)?;
    Ok(raw(to_value(&blockip::encode_rtc_as_4block(&ts)?)))
}
