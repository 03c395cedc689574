//! `doda` — command-line front end for the simulator, oracles and benchmark
//! harness.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 undetermined at
//! the given horizon (the run had not terminated and the evidence was
//! truncated, or a cost verdict could not be settled).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use doda::algorithms::{self, AlgoParams, Algorithm};
use doda::adversary;
use doda::engine::{simulate, simulate_adaptive, InteractionSequence, RunReport};
use doda::harness::{
    self, read_records_csv, summarize, ExperimentConfig, FitResult, HorizonRule, TauRule,
};
use doda::oracle::{self, CostVerdict};
use doda::Time;

const EXIT_UNDETERMINED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "doda",
    version,
    about = "Distributed online data aggregation: simulator, oracles, adversaries, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AlgoArgs {
    /// Algorithm name: waiting, gathering, waiting-greedy, tree,
    /// spanning-tree, full-future, offline.
    #[arg(long)]
    algo: String,
    /// Waiting Greedy threshold (required for waiting-greedy unless a
    /// formula constant applies).
    #[arg(long)]
    tau: Option<usize>,
}

impl AlgoArgs {
    fn build(&self) -> Result<Box<dyn Algorithm>> {
        Ok(algorithms::build(&self.algo, &AlgoParams { tau: self.tau })?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm over a sequence file and print the run report.
    Simulate {
        #[command(flatten)]
        algo: AlgoArgs,
        /// Sequence file (header `n <N> sink 0`, one `u v` pair per line).
        #[arg(long)]
        seq: PathBuf,
        /// Adjudication horizon (defaults to the sequence length).
        #[arg(long)]
        horizon: Option<usize>,
        /// Include the transmission events in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Monte Carlo benchmark over uniform random interaction streams.
    Bench {
        #[command(flatten)]
        algo: AlgoArgs,
        /// Node counts, comma-separated (e.g. 8,16,32,64,128).
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Waiting Greedy threshold constant: tau = c * n^1.5 * sqrt(ln n)
        /// (ignored when --tau is given).
        #[arg(long = "tau-c")]
        tau_c: Option<f64>,
        /// Horizon per trial: `auto` (= max(20 n^2, 10 tau)) or a number.
        #[arg(long, default_value = "auto")]
        horizon: String,
        /// Output file for the per-trial records.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Offline-optimal queries against a sequence file.
    Oracle {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_enum)]
        op: OracleOp,
        /// Start time for opt/schedule.
        #[arg(long, default_value_t = 0)]
        t: usize,
        /// Ladder index for T(i).
        #[arg(long, default_value_t = 1)]
        i: usize,
        /// Algorithm for the cost op.
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Cost report of one algorithm on a sequence file.
    Cost {
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Generate an interaction sequence file from an adversary family.
    Adversary {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stream length (random) or co-run horizon (theorem1/theorem3).
        #[arg(long)]
        horizon: Option<usize>,
        /// theorem2: length of the sink-cycle prefix.
        #[arg(long)]
        l0: Option<usize>,
        /// theorem2: index of the node that must route through the path.
        #[arg(long)]
        d: Option<u32>,
        /// theorem2: number of path-block repetitions.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Algorithm to co-run (required for the adaptive families).
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        tau: Option<usize>,
    },
    /// Fit a scaling model to benchmark records.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
    },
    /// Scan Waiting Greedy threshold constants for a termination target.
    Calibrate {
        #[arg(long, default_value = "waiting-greedy")]
        algo: String,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.9)]
        target: f64,
        #[arg(long, default_value_t = 2000)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constants to scan, comma-separated.
        #[arg(long = "cs", value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
        cs: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleOp {
    Opt,
    #[value(alias = "T")]
    T,
    Cost,
    Schedule,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Family {
    Random,
    Theorem1,
    Theorem2,
    Theorem3,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Power,
    Nlogn,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_sequence(path: &PathBuf) -> Result<InteractionSequence> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading sequence file {}", path.display()))?;
    Ok(InteractionSequence::parse(&text)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate { algo, seq, horizon, trace } => {
            let sequence = load_sequence(&seq)?;
            let mut rule = algo.build()?;
            let horizon = horizon.unwrap_or(sequence.len());
            let result = simulate(rule.as_mut(), &sequence, horizon)?;
            print_json(&RunReport::new(&algo.algo, &result, None, trace))?;
            let truncated_evidence = horizon < sequence.len() || sequence.truncated();
            if !result.terminated && truncated_evidence {
                return Ok(EXIT_UNDETERMINED);
            }
            Ok(0)
        }
        Command::Bench { algo, n, trials, seed, tau_c, horizon, out, format } => {
            let tau = match (&algo.algo[..], algo.tau, tau_c) {
                (_, Some(tau), _) => TauRule::Explicit(tau),
                ("waiting-greedy", None, c) => TauRule::Formula { c: c.unwrap_or(2.0) },
                _ => TauRule::None,
            };
            let horizon = match horizon.as_str() {
                "auto" => HorizonRule::Auto,
                h => HorizonRule::Explicit(
                    h.parse().context("horizon must be `auto` or a number")?,
                ),
            };
            let config = ExperimentConfig {
                algo: algo.algo.clone(),
                tau,
                ns: n,
                trials,
                base_seed: seed,
                horizon,
            };
            let records = harness::run_trials(&config)?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => harness::write_records_csv(&mut buf, &records)?,
                Format::Json => harness::write_records_json(&mut buf, &records)?,
            }
            fs::write(&out, &buf)
                .with_context(|| format!("writing records to {}", out.display()))?;
            print_json(&summarize(&records)?)?;
            Ok(0)
        }
        Command::Oracle { seq, op, t, i, algo, tau, horizon } => {
            let sequence = load_sequence(&seq)?;
            match op {
                OracleOp::Opt => {
                    #[derive(Serialize)]
                    struct Out {
                        op: &'static str,
                        t: usize,
                        value: Time,
                    }
                    print_json(&Out { op: "opt", t, value: oracle::opt(&sequence, t) })?;
                    Ok(0)
                }
                OracleOp::T => {
                    if i < 1 {
                        bail!("T(i) requires --i >= 1");
                    }
                    #[derive(Serialize)]
                    struct Out {
                        op: &'static str,
                        i: usize,
                        value: Time,
                    }
                    print_json(&Out {
                        op: "T",
                        i,
                        value: oracle::successive_convergecasts(&sequence, i),
                    })?;
                    Ok(0)
                }
                OracleOp::Schedule => {
                    #[derive(Serialize)]
                    struct Out {
                        op: &'static str,
                        t: usize,
                        feasible: bool,
                        #[serde(skip_serializing_if = "Option::is_none")]
                        events: Option<Vec<doda::TransmissionEvent>>,
                    }
                    let events = oracle::offline_schedule(&sequence, t);
                    print_json(&Out { op: "schedule", t, feasible: events.is_some(), events })?;
                    Ok(0)
                }
                OracleOp::Cost => {
                    let name = algo.context("--op cost requires --algo")?;
                    cost_command(&name, tau, &sequence, horizon)
                }
            }
        }
        Command::Cost { algo, seq, horizon } => {
            let sequence = load_sequence(&seq)?;
            cost_command(&algo.algo, algo.tau, &sequence, horizon)
        }
        Command::Adversary { family, n, seed, horizon, l0, d, reps, out, algo, tau } => {
            let (sequence, report) = match family {
                Family::Random => {
                    let n = n.context("--family random requires --n")?;
                    let horizon = horizon.context("--family random requires --horizon")?;
                    (adversary::randomized_stream(n, seed, horizon)?, None)
                }
                Family::Theorem2 => {
                    let n = n.context("--family theorem2 requires --n")?;
                    let seq = adversary::theorem2_sequence(
                        n,
                        l0.context("--family theorem2 requires --l0")?,
                        d.context("--family theorem2 requires --d")?,
                        reps.context("--family theorem2 requires --reps")?,
                    )?;
                    (seq, None)
                }
                Family::Theorem1 | Family::Theorem3 => {
                    let name =
                        algo.context("adaptive families require --algo to co-run")?;
                    let horizon = horizon.context("adaptive families require --horizon")?;
                    let mut rule = algorithms::build(&name, &AlgoParams { tau })?;
                    let run = match family {
                        Family::Theorem1 => {
                            let mut adv = adversary::theorem1_adversary();
                            simulate_adaptive(rule.as_mut(), &mut adv, horizon)?
                        }
                        _ => {
                            let mut adv = adversary::theorem3_adversary();
                            simulate_adaptive(rule.as_mut(), &mut adv, horizon)?
                        }
                    };
                    let report = RunReport::new(&name, &run.trace, Some(seed), false);
                    (run.realized, Some(report))
                }
            };
            fs::write(&out, sequence.to_file_string())
                .with_context(|| format!("writing sequence to {}", out.display()))?;
            if let Some(report) = report {
                print_json(&report)?;
            }
            Ok(0)
        }
        Command::Fit { input, model } => {
            let file = fs::File::open(&input)
                .with_context(|| format!("opening records file {}", input.display()))?;
            let records = read_records_csv(file)?;
            if records.is_empty() {
                bail!("no records in {}", input.display());
            }
            let mut algos: Vec<String> = records.iter().map(|r| r.algo.clone()).collect();
            algos.sort();
            algos.dedup();
            #[derive(Serialize)]
            struct Out {
                algo: String,
                points: Vec<(f64, f64)>,
                #[serde(flatten)]
                fit: FitResult,
            }
            let mut fits = Vec::new();
            for name in algos {
                let family: Vec<_> =
                    records.iter().filter(|r| r.algo == name).cloned().collect();
                let points: Vec<(f64, f64)> = summarize(&family)?
                    .into_iter()
                    .filter_map(|s| s.mean.map(|m| (f64::from(s.n), m)))
                    .collect();
                let fit = match model {
                    Model::Power => harness::fit_power_law(&points)?,
                    Model::Nlogn => harness::fit_n_log_n(&points)?,
                };
                fits.push(Out { algo: name, points, fit });
            }
            print_json(&fits)?;
            Ok(0)
        }
        Command::Calibrate { algo, n, target, trials, seed, cs } => {
            if algo != "waiting-greedy" {
                bail!("calibrate supports only waiting-greedy");
            }
            let report = harness::calibrate_waiting_greedy(n, trials, seed, &cs, target)?;
            print_json(&report)?;
            Ok(0)
        }
    }
}

fn cost_command(
    name: &str,
    tau: Option<usize>,
    sequence: &InteractionSequence,
    horizon: Option<usize>,
) -> Result<u8> {
    let mut rule = algorithms::build(name, &AlgoParams { tau })?;
    let horizon = horizon.unwrap_or(sequence.len());
    let report = oracle::cost(rule.as_mut(), sequence, horizon)?;
    #[derive(Serialize)]
    struct Out<'a> {
        algo: &'a str,
        #[serde(flatten)]
        report: &'a oracle::CostReport,
    }
    print_json(&Out { algo: name, report: &report })?;
    if matches!(report.cost, CostVerdict::Undetermined { .. }) {
        return Ok(EXIT_UNDETERMINED);
    }
    Ok(0)
}
