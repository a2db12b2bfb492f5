//! The experiment matrix: sample, solve, re-validate, normalize, time.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use orthosched::approx::ApproxError;
use orthosched::rng::mix_seed;
use orthosched::workload::{build_pool, parse_trace, sample_instance, JobPool, WorkloadError};
use orthosched::{format_decimal, lower_bound, validate, Instance, ModelError, Ratio, Time};

use crate::algo::Algorithm;
use crate::config::{BenchConfig, Source};

pub const HEADER: &str = "instance_id,n,m,seed,algorithm,cmax,lower_bound,normalized_cmax,runtime_ms";

/// Algorithm column of a row that stands for an instance that could not be drawn.
pub const SKIPPED: &str = "skipped";

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Solved {
        algorithm: Algorithm,
        cmax: Time,
        lower_bound: Ratio,
        runtime_ms: f64,
    },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub outcome: Outcome,
}

impl BenchRow {
    pub fn algorithm(&self) -> Option<Algorithm> {
        match self.outcome {
            Outcome::Solved { algorithm, .. } => Some(algorithm),
            Outcome::Skipped { .. } => None,
        }
    }

    /// `cmax / L`, exact.
    pub fn normalized_cmax(&self) -> Option<Ratio> {
        match &self.outcome {
            Outcome::Solved { cmax, lower_bound, .. } => {
                Some(Ratio::from_integer(*cmax as i128) / lower_bound)
            }
            Outcome::Skipped { .. } => None,
        }
    }

    pub fn runtime_ms(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Solved { runtime_ms, .. } => Some(runtime_ms),
            Outcome::Skipped { .. } => None,
        }
    }

    /// One CSV line without the trailing newline. Skipped rows leave the
    /// result columns empty.
    pub fn to_csv_line(&self) -> String {
        let head = format!("{},{},{},{}", self.instance_id, self.n, self.m, self.seed);
        match &self.outcome {
            Outcome::Solved { algorithm, cmax, lower_bound, runtime_ms } => format!(
                "{head},{algorithm},{cmax},{},{},{runtime_ms:.3}",
                format_decimal(lower_bound, 6),
                format_decimal(&self.normalized_cmax().expect("solved"), 6),
            ),
            Outcome::Skipped { .. } => format!("{head},{SKIPPED},,,,"),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Trace { path: String, source: WorkloadError },
    #[error("{path}: {source}")]
    Instance { path: String, source: ModelError },
    #[error("{algorithm} on {instance_id}: {source}")]
    Solve { instance_id: String, algorithm: Algorithm, source: ApproxError },
    #[error("{algorithm} on {instance_id} produced an invalid schedule: {detail}")]
    Invalid { instance_id: String, algorithm: Algorithm, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

enum Workload {
    Pool(JobPool),
    Fixed(Instance),
}

pub fn load_pool(path: &Path) -> Result<JobPool, BenchError> {
    let trace_error = |source| BenchError::Trace { path: path.display().to_string(), source };
    let file = File::open(path).map_err(|e| trace_error(e.into()))?;
    let records = parse_trace(BufReader::new(file)).map_err(trace_error)?;
    build_pool(&records).map_err(trace_error)
}

pub fn load_instance(path: &Path) -> Result<Instance, BenchError> {
    let instance_error = |source| BenchError::Instance { path: path.display().to_string(), source };
    let file = File::open(path).map_err(|e| instance_error(e.into()))?;
    Instance::read_text(BufReader::new(file)).map_err(instance_error)
}

/// Runs every (n, m, rep) cell and every algorithm on it, in that order.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let workload = match &config.source {
        Source::Trace(path) => Workload::Pool(load_pool(path)?),
        Source::Instance(path) => Workload::Fixed(load_instance(path)?),
    };
    let mut rows = Vec::new();
    match &workload {
        Workload::Pool(pool) => {
            for &n in &config.ns {
                for &m in &config.ms {
                    for rep in 0..config.reps {
                        let seed = mix_seed(config.seed, &[n as u64, m as u64, rep as u64]);
                        let instance_id = format!("n{n}-m{m}-r{rep}");
                        match sample_instance(pool, n, m, seed) {
                            Ok(instance) => {
                                run_cell(&instance, &instance_id, seed, &config.algorithms, &mut rows)?
                            }
                            Err(e @ WorkloadError::Rejected { .. }) => rows.push(BenchRow {
                                instance_id,
                                n,
                                m,
                                seed,
                                outcome: Outcome::Skipped { reason: e.to_string() },
                            }),
                            Err(source) => {
                                return Err(BenchError::Trace { path: "pool".into(), source })
                            }
                        }
                    }
                }
            }
        }
        Workload::Fixed(instance) => {
            let (n, m) = (instance.len(), instance.machines());
            for rep in 0..config.reps {
                let seed = mix_seed(config.seed, &[n as u64, m as u64, rep as u64]);
                run_cell(instance, &format!("fixed-r{rep}"), seed, &config.algorithms, &mut rows)?;
            }
        }
    }
    Ok(rows)
}

fn run_cell(
    instance: &Instance,
    instance_id: &str,
    seed: u64,
    algorithms: &[Algorithm],
    rows: &mut Vec<BenchRow>,
) -> Result<(), BenchError> {
    let lower = lower_bound(instance);
    for &algorithm in algorithms {
        let started = Instant::now();
        let schedule = algorithm.solve(instance, seed).map_err(|source| BenchError::Solve {
            instance_id: instance_id.into(),
            algorithm,
            source,
        })?;
        let runtime_ms = started.elapsed().as_secs_f64() * 1000.0;

        let report = validate(&schedule);
        if !report.ok() || !schedule.is_complete() {
            let detail = match report.violations.first() {
                Some(v) => v.to_string(),
                None => format!("{} of {} jobs scheduled", schedule.len(), instance.len()),
            };
            return Err(BenchError::Invalid { instance_id: instance_id.into(), algorithm, detail });
        }
        rows.push(BenchRow {
            instance_id: instance_id.into(),
            n: instance.len(),
            m: instance.machines(),
            seed,
            outcome: Outcome::Solved {
                algorithm,
                cmax: schedule.makespan(),
                lower_bound: lower,
                runtime_ms,
            },
        });
    }
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line())?;
    }
    out.flush()
}
