use rtmix_core::blockip::{self, DEFAULT_BUDGET};
use rtmix_core::gen::{self, JitterMode};
use rtmix_core::mixing;
use rtmix_core::rta::{self, Algorithm, ResponseQuery};
use rtmix_core::TaskSystem;
use serde::Serialize;
use serde_json::json;

use crate::report::{CliError, CliResult, Outcome, Report, Stopwatch, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Harmonic systems with arbitrary jitter, Narrow/Catch.
    RtaHarmonic,
    /// Arbitrary periods, Turing reduction.
    RtaGeneral,
    MixHarmonic,
    MixGeneral,
    /// Jitter-free systems through the 4-block encoding.
    Blockip,
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    index: usize,
    seed: u64,
    result: i64,
    ops: u64,
    wall_ms: f64,
}

pub struct BenchParams {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub p_max: i64,
}

fn last_query(ts: &TaskSystem) -> CliResult<ResponseQuery> {
    Ok(ResponseQuery::for_task(ts, ts.len() - 1)?)
}

/// Solve one instance; returns the result and, with `verify`, the oracle's.
fn run_one(p: &BenchParams, seed: u64, verify: bool) -> CliResult<(i64, Option<i64>)> {
    match p.suite {
        Suite::RtaHarmonic | Suite::RtaGeneral => {
            let harmonic = p.suite == Suite::RtaHarmonic;
            let ts = gen::random_system(seed, p.n, p.p_max, harmonic, JitterMode::UpToPeriod)?;
            let q = last_query(&ts)?;
            let alg = if harmonic { Algorithm::Harmonic } else { Algorithm::Turing };
            let (r, _) = rta::response(&q, alg)?;
            let oracle = verify.then(|| rta::response_bruteforce(&q)).transpose()?;
            Ok((r, oracle))
        }
        Suite::MixHarmonic | Suite::MixGeneral => {
            let harmonic = p.suite == Suite::MixHarmonic;
            let inst = gen::random_mix(seed, p.n, p.p_max, 4 * p.p_max, 16, harmonic)?;
            let sol = mixing::solve(&inst)?;
            let oracle = verify.then(|| mixing::solve_bruteforce(&inst)).transpose()?;
            Ok((sol.objective, oracle.map(|o| o.objective)))
        }
        Suite::Blockip => {
            let ts = gen::random_system(seed, p.n, p.p_max, false, JitterMode::Zero)?;
            let enc = blockip::encode_rtc_as_4block(&ts)?;
            let r = blockip::solve_simple_4block(&enc, enc.default_h(), DEFAULT_BUDGET)?;
            let q = last_query(&ts)?;
            let oracle = verify.then(|| rta::response_jitter_free(&q)).transpose()?;
            Ok((r, oracle))
        }
    }
}

pub fn bench(p: &BenchParams, verify: bool) -> CliResult<Outcome> {
    let mut rows = Vec::with_capacity(p.count);
    for index in 0..p.count {
        let seed = p.seed.wrapping_add(index as u64);
        let clock = Stopwatch::start();
        let (result, oracle) = run_one(p, seed, verify)?;
        let t = clock.stop();
        if let Some(o) = oracle {
            if o != result {
                return Err(CliError::Mismatch(format!("instance {index} (seed {seed}): {result} vs oracle {o}")));
            }
        }
        rows.push(Row { index, seed, result, ops: t.ops, wall_ms: t.wall_ms });
    }
    let total_ops: u64 = rows.iter().map(|r| r.ops).sum();
    let total_ms: f64 = rows.iter().map(|r| r.wall_ms).sum();
    let max_ops = rows.iter().map(|r| r.ops).max().unwrap_or(0);
    let mean_ops = if rows.is_empty() { 0.0 } else { total_ops as f64 / rows.len() as f64 };
    let suite = clap::ValueEnum::to_possible_value(&p.suite).map_or(String::new(), |v| v.get_name().to_string());
    let text = format!(
        "{} instances: {total_ops} ops total, {mean_ops:.1} mean, {max_ops} max, {total_ms:.2} ms\n",
        rows.len()
    );
    let report = Report {
        result: json!({
            "rows": rows,
            "total_ops": total_ops,
            "mean_ops": mean_ops,
            "max_ops": max_ops,
        }),
        algorithm: Some(suite.clone()),
        certificates: Vec::new(),
        timings: crate::report::Timings { wall_ms: total_ms, ops: total_ops },
        instance: json!({ "suite": suite, "seed": p.seed, "count": p.count, "n": p.n, "p_max": p.p_max }),
        verified: verify.then_some(true),
    };
    Ok(Outcome { report: Some(report), raw: None, text, exit: EXIT_OK })
}
