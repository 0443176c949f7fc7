//! `aft-sim`: run scenario files, sweep a parameter axis, or qualify an
//! artira transform against sampled data.
//!
//! Exit codes: 0 on completion (commit failures are data, not errors),
//! 2 on validation errors, 3 on parse errors, 1 on I/O problems.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use aft_core::harness::{self, parse_scenario, Scenario, ScenarioError, SweepAxis};
use aft_core::metric::MetricSpace;
use aft_core::redundancy::{
    check_redundancy, qualify_artira, PairedSamples, QualifyOutcome,
};
use aft_core::simnet::SimError;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "aft-sim",
    about = "Deterministic simulator for quorum replication over artificial replicas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and emit its per-request CSV.
    Run {
        /// Scenario file (.scn).
        file: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Seed override; takes precedence over the file seed and the
        /// AFT_SIM_SEED environment variable.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run a scenario across a list of values on one axis.
    Sweep {
        file: PathBuf,
        /// One of: epsilon, alpha, drop_prob, f.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values, e.g. 0,0.1,0.2.
        #[arg(long)]
        values: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Qualify a transform as an artira from paired samples.
    Qualify {
        /// CSV with header `x,y` and two numeric columns.
        #[arg(long)]
        samples: PathBuf,
        /// Transform spec, e.g. `affine(0.5555555555555556, -17.77777777777778)`.
        #[arg(long)]
        transform: String,
        /// Target certainty in (0, 1].
        #[arg(long)]
        alpha: f64,
        /// Target accuracy bound.
        #[arg(long)]
        epsilon: f64,
        /// Grid step for the bound sweep; defaults to epsilon / 100.
        #[arg(long)]
        step: Option<f64>,
        /// Metric space: absolute, euclidean, or discrete.
        #[arg(long, default_value = "absolute")]
        space: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, csv, seed } => cmd_run(&file, csv.as_deref(), seed),
        Command::Sweep { file, axis, values, seed } => cmd_sweep(&file, &axis, &values, seed),
        Command::Qualify { samples, transform, alpha, epsilon, step, space } => {
            cmd_qualify(&samples, &transform, alpha, epsilon, step, &space)
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("AFT_SIM_SEED").ok()?.parse().ok()
}

fn load_scenario(path: &Path) -> Result<Scenario, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            ScenarioError::Parse { .. } => ExitCode::from(EXIT_PARSE),
            ScenarioError::Validation { .. } => ExitCode::from(EXIT_VALIDATION),
        }
    })
}

fn sim_error_exit(e: &SimError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        SimError::Validation { .. } => ExitCode::from(EXIT_VALIDATION),
        _ => ExitCode::from(EXIT_IO),
    }
}

fn cmd_run(file: &Path, csv_path: Option<&Path>, seed_flag: Option<u64>) -> ExitCode {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let seed = scenario.effective_seed(seed_flag, env_seed());
    let run = match harness::run_scenario(&scenario, seed) {
        Ok(run) => run,
        Err(e) => return sim_error_exit(&e),
    };
    match csv_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &run.csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
            println!("scenario: {}", scenario.name);
            println!("seed: {seed}");
            println!("{}", run.metrics);
        }
        None => {
            print!("{}", run.csv);
            eprintln!("scenario: {}", scenario.name);
            eprintln!("seed: {seed}");
            eprintln!("{}", run.metrics);
        }
    }
    ExitCode::SUCCESS
}

fn cmd_sweep(file: &Path, axis: &str, values: &str, seed_flag: Option<u64>) -> ExitCode {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let axis = match SweepAxis::from_str(axis) {
        Ok(axis) => axis,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let values: Vec<f64> = match values
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect()
    {
        Ok(v) => v,
        Err(_) => {
            eprintln!("error: --values must be a comma-separated list of numbers");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let seed = scenario.effective_seed(seed_flag, env_seed());
    match harness::sweep(&scenario, axis, &values, seed) {
        Ok(csv) => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
        Err(e) => sim_error_exit(&e),
    }
}

fn cmd_qualify(
    samples_path: &Path,
    transform_text: &str,
    alpha: f64,
    epsilon: f64,
    step: Option<f64>,
    space_name: &str,
) -> ExitCode {
    let space = match space_name {
        "absolute" => MetricSpace::AbsoluteDifference,
        "euclidean" => MetricSpace::EuclideanVector,
        "discrete" => MetricSpace::Discrete01,
        other => {
            eprintln!("error: unknown space \"{other}\" (absolute, euclidean, discrete)");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let transform = match harness::parse_transform(transform_text) {
        Ok(t) => t,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let samples = match PairedSamples::from_csv_path(samples_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let step = step.unwrap_or(if epsilon > 0.0 { epsilon / 100.0 } else { 1.0 });

    println!("samples: {}", samples.len());
    match check_redundancy(&samples, 0.5) {
        Ok(report) => println!("zeta: {} (|zeta| >= 0.5: {})", report.zeta, report.accepted),
        Err(e) => println!("zeta: unavailable ({e})"),
    }
    match qualify_artira(&samples, &transform, alpha, epsilon, space, step) {
        Ok(QualifyOutcome::Accepted(triple)) => {
            println!(
                "result: accepted model={} alpha={} epsilon={}",
                triple.model, triple.alpha, triple.epsilon
            );
            ExitCode::SUCCESS
        }
        Ok(QualifyOutcome::Rejected(rejection)) => {
            println!(
                "result: rejected best_alpha={} best_epsilon={}",
                rejection.best_alpha, rejection.best_epsilon
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
