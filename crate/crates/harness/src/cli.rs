//! Subcommands and their exit codes.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use orthosched::approx::ApproxError;
use orthosched::oracle::{optimal_makespan, DEFAULT_BUDGET};
use orthosched::workload::{parse_trace, pool_summary, sample_instance, spearman, WorkloadError};
use orthosched::{format_decimal, lower_bound, validate, Instance, ModelError, Schedule, ScheduleError, Time};

use crate::algo::Algorithm;
use crate::bench::{load_pool, run_bench, write_rows, BenchError, Outcome};
use crate::config::{BenchConfig, ConfigError};
use crate::summary::{render, summarize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "orthosched", version, about = "Makespan scheduling with one shared renewable resource")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schedule an instance and print its makespan.
    Solve {
        #[arg(long, value_enum)]
        algo: Algorithm,
        #[arg(long)]
        input: PathBuf,
        /// Seed for `rand`; ignored by the other algorithms.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Schedule CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule CSV against its instance. Exits 1 on any violation.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Exact optimum by branch and bound. Exits 4 if the budget runs out.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        /// Maximum number of search nodes.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Write the optimal schedule here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample an instance from a trace.
    Gen {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pool statistics of a trace: size, capacity, quartiles of r, Spearman.
    Stats {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run an experiment matrix described by a key=value config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Also write the per-cell summary (with runtimes) here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Instance { path: String, source: ModelError },
    #[error("{path}: {source}")]
    Schedule { path: String, source: ScheduleError },
    #[error("{path}: {source}")]
    Trace { path: String, source: WorkloadError },
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Solve(#[from] ApproxError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("schedule is infeasible")]
    Infeasible,
    #[error("node budget exhausted; best makespan found is {0}")]
    Budget(Time),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible | CliError::Solve(_) => EXIT_INVALID,
            CliError::Bench(BenchError::Invalid { .. } | BenchError::Solve { .. }) => EXIT_INVALID,
            CliError::Budget(_) | CliError::Trace { source: WorkloadError::Rejected { .. }, .. } => EXIT_BUDGET,
            _ => EXIT_IO,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let instance_error = |source| CliError::Instance { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_error(path))?;
    Instance::read_text(BufReader::new(file)).map_err(instance_error)
}

fn read_trace(path: &Path) -> Result<Vec<orthosched::workload::TraceRecord>, CliError> {
    let trace_error = |source| CliError::Trace { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_error(path))?;
    parse_trace(BufReader::new(file)).map_err(trace_error)
}

fn write_schedule(schedule: &Schedule<'_>, out: Option<&Path>) -> Result<(), CliError> {
    let result = match out {
        Some(path) => schedule.write_csv(BufWriter::new(File::create(path).map_err(io_error(path))?)),
        None => schedule.write_csv(io::stdout().lock()),
    };
    result.map_err(|source| CliError::Schedule {
        path: out.map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    })
}

/// Runs one parsed command. Normal output goes to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { algo, input, seed, out } => {
            let instance = read_instance(&input)?;
            let schedule = algo.solve(&instance, seed)?;
            write_schedule(&schedule, out.as_deref())?;
            if out.is_some() {
                println!("cmax={}", schedule.makespan());
            } else {
                eprintln!("cmax={}", schedule.makespan());
            }
        }
        Command::Validate { input, schedule } => {
            let instance = read_instance(&input)?;
            let file = File::open(&schedule).map_err(io_error(&schedule))?;
            let parsed = Schedule::read_csv(&instance, BufReader::new(file)).map_err(|source| {
                CliError::Schedule { path: schedule.display().to_string(), source }
            })?;
            let report = validate(&parsed);
            if !report.ok() {
                for v in &report.violations {
                    println!("{v}");
                }
                return Err(CliError::Infeasible);
            }
            println!("ok");
            if !parsed.is_complete() {
                eprintln!("note: {} of {} jobs scheduled", parsed.len(), instance.len());
            }
        }
        Command::Oracle { input, budget, out } => {
            let instance = read_instance(&input)?;
            let result = optimal_makespan(&instance, budget);
            println!("lower_bound={}", format_decimal(&lower_bound(&instance), 6));
            println!("nodes={}", result.nodes_explored);
            if !result.exhausted {
                return Err(CliError::Budget(result.opt));
            }
            println!("opt={}", result.opt);
            if let Some(path) = out {
                write_schedule(&result.optimal_schedule, Some(&path))?;
            }
        }
        Command::Gen { trace, n, m, seed, out } => {
            let pool = load_pool(&trace).map_err(|e| match e {
                BenchError::Trace { path, source } => CliError::Trace { path, source },
                other => CliError::Bench(other),
            })?;
            let instance = sample_instance(&pool, n, m, seed)
                .map_err(|source| CliError::Trace { path: trace.display().to_string(), source })?;
            let mut w = BufWriter::new(File::create(&out).map_err(io_error(&out))?);
            instance.write_text(&mut w).and_then(|_| w.flush()).map_err(io_error(&out))?;
        }
        Command::Stats { trace } => {
            let records = read_trace(&trace)?;
            let pool = orthosched::workload::build_pool(&records)
                .map_err(|source| CliError::Trace { path: trace.display().to_string(), source })?;
            print!("{}", pool_summary(&pool));
            // over every parsed record, before any filtering
            let pairs: Vec<(i64, i64)> = records
                .iter()
                .map(|r| (r.duration as i64, r.memory as i64))
                .collect();
            match spearman(&pairs) {
                Ok(rho) => println!("spearman={rho:.6}"),
                Err(_) => println!("spearman=nan"),
            }
        }
        Command::Bench { config, summary } => {
            let parsed = BenchConfig::load(&config)
                .map_err(|source| CliError::Config { path: config.display().to_string(), source })?;
            let rows = run_bench(&parsed)?;
            for row in &rows {
                if let Outcome::Skipped { reason } = &row.outcome {
                    eprintln!("skipped {}: {reason}", row.instance_id);
                }
            }
            match &parsed.out {
                Some(path) => {
                    let file = File::create(path).map_err(io_error(path))?;
                    write_rows(&rows, BufWriter::new(file)).map_err(io_error(path))?;
                    print!("{}", render(&summarize(&rows), true));
                }
                None => write_rows(&rows, io::stdout().lock()).map_err(io_error(Path::new("<stdout>")))?,
            }
            if let Some(path) = summary {
                fs::write(&path, render(&summarize(&rows), true)).map_err(io_error(&path))?;
            }
        }
    }
    Ok(())
}
