//! `rtmix`: response-time analysis, Mixing Set solving, instance generation,
//! schedule simulation and benchmarking from the command line.

mod bench;
mod commands;
mod report;

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rtmix_core::arith;
use rtmix_core::blockip::DEFAULT_BUDGET;
use rtmix_core::gen::JitterMode;
use rtmix_core::sim::Measure;

use bench::{BenchParams, Suite};
use commands::{MixAlgorithm, RtaAlgorithm};
use report::{CliError, CliResult, Outcome, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "rtmix", version, about = "Exact response-time analysis via Mixing Set reductions")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Re-check results against a brute-force oracle.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Response-time analysis.
    Rta {
        #[command(subcommand)]
        cmd: RtaCmd,
    },
    /// Mixing Set instances.
    Mix {
        #[command(subcommand)]
        cmd: MixCmd,
    },
    /// Instance generators; output is plain instance JSON.
    Gen {
        #[command(subcommand)]
        cmd: GenCmd,
    },
    /// Schedule simulation.
    Sim {
        #[command(subcommand)]
        cmd: SimCmd,
    },
    /// Simple 4-block integer programs.
    Blockip {
        #[command(subcommand)]
        cmd: BlockipCmd,
    },
    /// Seeded benchmark suites reporting wall time and operation counts.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        p_max: i64,
    },
}

#[derive(Subcommand)]
enum RtaCmd {
    /// Response time of every task of a system.
    Compute {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = RtaAlgorithm::Auto)]
        algorithm: RtaAlgorithm,
        /// Exit with status 1 unless every task meets its deadline.
        #[arg(long)]
        require_schedulable: bool,
    },
}

#[derive(Subcommand)]
enum MixCmd {
    Solve {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = MixAlgorithm::Auto)]
        algorithm: MixAlgorithm,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum JitterArg {
    Zero,
    UpToPeriod,
    Full,
}

impl From<JitterArg> for JitterMode {
    fn from(j: JitterArg) -> Self {
        match j {
            JitterArg::Zero => JitterMode::Zero,
            JitterArg::UpToPeriod => JitterMode::UpToPeriod,
            JitterArg::Full => JitterMode::Full,
        }
    }
}

#[derive(Subcommand)]
enum GenCmd {
    /// Fully utilized harmonic system on which both upper bounds are tight.
    Extreme {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p1: i64,
        /// The first n-2 costs, comma separated; one value is repeated.
        #[arg(long)]
        c: String,
        /// `p`, `zero` or a comma-separated list of n jitters.
        #[arg(long, default_value = "p")]
        jitter: String,
    },
    /// Mixing Set instance whose optimum sits at lcm - 1.
    TightMix {
        #[arg(long)]
        n: u32,
    },
    /// Seeded random task system.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p_max: i64,
        #[arg(long)]
        harmonic: bool,
        #[arg(long, value_enum, default_value_t = JitterArg::UpToPeriod)]
        jitter: JitterArg,
    },
    /// Seeded random bounded Mixing Set instance.
    RandomMix {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a_max: i64,
        #[arg(long, default_value_t = 50)]
        b_abs: i64,
        #[arg(long, default_value_t = 10)]
        w_max: i64,
        #[arg(long)]
        harmonic: bool,
    },
    /// Seeded legal release pattern for a system.
    Releases {
        #[arg(long)]
        input: String,
        #[arg(long)]
        horizon: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    FromRelease,
    FromArrival,
}

#[derive(Subcommand)]
enum SimCmd {
    Run {
        #[arg(long)]
        input: String,
        #[arg(long)]
        releases: String,
        #[arg(long)]
        horizon: i64,
        /// Include a plain-text Gantt chart.
        #[arg(long)]
        gantt: bool,
        #[arg(long, value_enum, default_value_t = MeasureArg::FromRelease)]
        measure: MeasureArg,
    },
}

#[derive(Subcommand)]
enum BlockipCmd {
    Solve {
        #[arg(long)]
        input: String,
        /// Objective search range [-H, H]; defaults to sum |w_i| u_i.
        #[arg(long = "H")]
        h: Option<i64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// 4-block encoding of a jitter-free task system.
    EncodeRtc {
        #[arg(long)]
        input: String,
    },
}

fn apply_limit_env() -> CliResult<()> {
    match std::env::var("RTMIX_LIMIT_BITS") {
        Ok(v) => {
            let bits: u32 = v.trim().parse().map_err(|e| CliError::Input(format!("RTMIX_LIMIT_BITS = {v:?}: {e}")))?;
            arith::set_limit_bits(bits);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    apply_limit_env()?;
    let verify = cli.verify;
    match &cli.command {
        Command::Rta { cmd: RtaCmd::Compute { input, algorithm, require_schedulable } } => {
            commands::rta_compute(input, *algorithm, *require_schedulable, verify)
        }
        Command::Mix { cmd: MixCmd::Solve { input, algorithm } } => commands::mix_solve(input, *algorithm, verify),
        Command::Gen { cmd } => match cmd {
            GenCmd::Extreme { n, p1, c, jitter } => commands::gen_extreme(*n, *p1, c, jitter),
            GenCmd::TightMix { n } => commands::gen_tight_mix(*n),
            GenCmd::Random { seed, n, p_max, harmonic, jitter } => {
                commands::gen_random(*seed, *n, *p_max, *harmonic, (*jitter).into())
            }
            GenCmd::RandomMix { seed, n, a_max, b_abs, w_max, harmonic } => {
                commands::gen_random_mix(*seed, *n, *a_max, *b_abs, *w_max, *harmonic)
            }
            GenCmd::Releases { input, horizon, seed } => commands::gen_releases(input, *horizon, *seed),
        },
        Command::Sim { cmd: SimCmd::Run { input, releases, horizon, gantt, measure } } => {
            let measure = match measure {
                MeasureArg::FromRelease => Measure::FromRelease,
                MeasureArg::FromArrival => Measure::FromArrival,
            };
            commands::sim_run(input, releases, *horizon, *gantt, measure)
        }
        Command::Blockip { cmd } => match cmd {
            BlockipCmd::Solve { input, h, budget } => commands::blockip_solve(input, *h, *budget, verify),
            BlockipCmd::EncodeRtc { input } => commands::blockip_encode_rtc(input),
        },
        Command::Bench { suite, seed, count, n, p_max } => {
            bench::bench(&BenchParams { suite: *suite, seed: *seed, count: *count, n: *n, p_max: *p_max }, verify)
        }
    }
}

/// Write to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => emit(&out.text),
                Format::Json => {
                    let value = match (&out.report, &out.raw) {
                        (Some(r), _) => serde_json::to_value(r).expect("serializable"),
                        (None, Some(v)) => v.clone(),
                        (None, None) => serde_json::Value::Null,
                    };
                    emit(&(serde_json::to_string_pretty(&value).expect("serializable") + "\n"));
                }
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("rtmix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
