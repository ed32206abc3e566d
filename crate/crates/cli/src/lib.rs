//! Command-line front end: instance files, solves, generators and
//! experiment suites with reproducible output.

pub mod experiment;
pub mod gen;
pub mod instance;
pub mod output;
pub mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dro_core::lp;
use dro_core::Family;

use crate::experiment::{ExperimentOptions, Suite};
use crate::gen::{BallArg, GenOptions, MetricArg};
use crate::output::{csv_table, emit, record_line, Format, Row, RunConfig, RunManifest};
use crate::solve::{Method, SolveOptions};

/// Runs `f` on a private one-thread pool and returns its simplex pivot
/// count. Pivots are counted per thread, so the count is exact only when
/// every nested parallel loop stays on that thread.
pub fn metered<T: Send>(f: impl FnOnce() -> T + Send) -> Result<(T, u64)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().context("building a worker pool")?;
    Ok(pool.install(|| {
        lp::reset_work_counters();
        let out = f();
        (out, lp::work_counters().0)
    }))
}

#[derive(Debug, Parser)]
#[command(name = "dro", version, about = "Distributionally robust two-stage covering problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long = "sample-constant", default_value_t = dro_core::saa::DEFAULT_SAMPLE_CONSTANT)]
    pub sample_constant: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "records")]
    pub format: Format,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            kappa: self.kappa,
            replicates: self.replicates,
            samples: self.samples,
            sample_constant: self.sample_constant,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Use the exhaustive oracle and compare with the exact optimum.
        #[arg(long)]
        exact: bool,
        /// Stop the ellipsoid search after this many iterations.
        #[arg(long)]
        iteration_cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a seeded random instance file.
    Gen {
        #[arg(value_parser = parse_family)]
        family: Family,
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        support: usize,
        #[arg(long)]
        sampler: bool,
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        #[arg(long, value_enum, default_value = "wasserstein")]
        ball: BallArg,
        #[arg(long, value_enum, default_value = "discrete")]
        metric: MetricArg,
        #[arg(long)]
        scenario_bound: Option<usize>,
        #[arg(long)]
        large: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment suite.
    Experiment {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Sample sizes for saa-sweep, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50,200,800")]
        grid: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    [Family::SetCover, Family::VertexCover, Family::EdgeCover, Family::FacilityLocation, Family::Steiner]
        .into_iter()
        .find(|f| f.name() == s || f.name().replace('_', "-") == s)
        .ok_or_else(|| format!("unknown family `{s}`"))
}

/// The command line with the program path replaced by `dro`.
fn command_line(args: &[String]) -> String {
    std::iter::once("dro").chain(args.iter().skip(1).map(String::as_str)).collect::<Vec<_>>().join(" ")
}

#[derive(serde::Serialize)]
struct SolveRow<'a> {
    instance: &'a str,
    method: &'a str,
    family: &'a str,
    seed: u64,
    estimate: f64,
    value: Option<f64>,
    opt: Option<f64>,
    ratio: Option<f64>,
    solution: String,
    iterations: usize,
    runtime: u64,
}

/// Runs a parsed command; `args` is the raw command line for the manifest.
pub fn run(cli: Cli, args: &[String]) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { instance, method, exact, iteration_cap, common } => {
            let (inst, hash) = instance::load(&instance)?;
            let opts = SolveOptions {
                method,
                exact,
                epsilon: common.epsilon,
                delta: common.delta,
                kappa: common.kappa,
                replicates: common.replicates,
                samples: common.samples,
                sample_constant: common.sample_constant,
                seed: common.seed,
                iteration_cap,
            };
            let report = solve::solve(&inst, &opts)?;
            let manifest = RunManifest {
                command: command_line(args),
                instance: Some(instance.display().to_string()),
                instance_hash: Some(hash),
                config: common.config(),
                outputs: common.out.iter().map(|p| p.display().to_string()).collect(),
            };
            let body = match common.format {
                Format::Records => record_line("manifest", &manifest)? + &record_line("solve", &report)?,
                Format::Csv => {
                    let name = instance.display().to_string();
                    csv_table(&[SolveRow {
                        instance: &name,
                        method: method.name(),
                        family: report.family,
                        seed: report.seed,
                        estimate: report.estimate,
                        value: report.exact.as_ref().map(|e| e.value),
                        opt: report.exact.as_ref().map(|e| e.optimum),
                        ratio: report.exact.as_ref().map(|e| e.ratio),
                        solution: report.solution.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                        iterations: report.iterations,
                        runtime: report.runtime,
                    }])?
                }
            };
            emit(common.out.as_deref(), &body, &manifest)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { family, size, seed, support, sampler, radius, ball, metric, scenario_bound, large, out } => {
            let opts = GenOptions { family, size, seed, support, sampler, radius, ball, metric, scenario_bound, large };
            let text = toml::to_string(&gen::generate_file(&opts)?)?;
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { suite, trials, grid, common } => {
            let opts = ExperimentOptions {
                trials,
                seed: common.seed,
                epsilon: common.epsilon,
                grid,
                replicates: common.replicates.unwrap_or(8),
            };
            let rows = experiment::run_suite(suite, &opts)?;
            let manifest = RunManifest {
                command: command_line(args),
                instance: None,
                instance_hash: None,
                config: common.config(),
                outputs: common.out.iter().map(|p| p.display().to_string()).collect(),
            };
            let body = match common.format {
                Format::Records => {
                    let mut s = record_line("manifest", &manifest)?;
                    for r in &rows {
                        s += &record_line("row", r)?;
                    }
                    s
                }
                Format::Csv => csv_table(&rows)?,
            };
            emit(common.out.as_deref(), &body, &manifest)?;
            let bad: Vec<&Row> = experiment::violations(&rows);
            for r in &bad {
                eprintln!("violation: {} {} {} ratio {:?} > bound {:?} (seed {})", r.instance, r.method, r.param, r.ratio, r.bound, r.seed);
            }
            Ok(if bad.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
