//! Trace ingestion, statistics and seeded instance sampling.
//!
//! A trace is a CSV file with at least the columns `duration_s` and
//! `memory_bytes`. Durations become processing times and memory becomes the
//! resource requirement, with the pool capacity set to the largest memory
//! that survives the percentile filter.

use std::fmt;
use std::io::Read;

use rand_core::RngCore;
use thiserror::Error;

use crate::bounds::lower_bound;
use crate::model::{Instance, ModelError, Time};
use crate::ratio::{format_decimal, ratio, Ratio};
use crate::rng::splitmix;

pub const DURATION_COLUMN: &str = "duration_s";
pub const MEMORY_COLUMN: &str = "memory_bytes";

/// Percentile applied to both columns by [`build_pool`].
pub const FILTER_PERCENTILE: u32 = 99;

/// Reseeding attempts after the first draw in [`sample_instance`].
pub const MAX_RETRIES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub duration: u64,
    pub memory: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("trace is missing the `{0}` column")]
    MissingColumn(&'static str),
    #[error("{} malformed row(s), first at {}", .0.len(), .0[0])]
    MalformedRows(Vec<RowError>),
    #[error("trace I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("percentile of an empty sample")]
    EmptySample,
    #[error("percentile {0} is outside 1..=100")]
    BadPercentile(u32),
    #[error("no usable records: {0}")]
    EmptyPool(&'static str),
    #[error("every kept record has zero memory, so the capacity would be 0")]
    ZeroCapacity,
    #[error("spearman needs at least two pairs with varying x and y")]
    Degenerate,
    #[error("n and m must be positive")]
    BadDimensions,
    #[error("no nontrivial instance (max p < L) after {attempts} draws")]
    Rejected { attempts: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Reads trace records in file order. Every malformed row is collected with
/// its line number before failing.
pub fn parse_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, WorkloadError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(WorkloadError::MissingColumn(name))
    };
    let duration_at = column(DURATION_COLUMN)?;
    let memory_at = column(MEMORY_COLUMN)?;

    let mut records = Vec::new();
    let mut bad = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(e.into()),
                _ => {
                    bad.push(RowError {
                        line: e.position().map_or(0, |p| p.line()),
                        message: e.to_string(),
                    });
                    continue;
                }
            },
        };
        let line = row.position().map_or(0, |p| p.line());
        let field = |at: usize, name: &str| -> Result<u64, String> {
            let raw = row.get(at).ok_or_else(|| format!("missing {name}"))?;
            raw.parse::<u64>()
                .map_err(|_| format!("{name} {raw:?} is not a non-negative integer"))
        };
        match (field(duration_at, DURATION_COLUMN), field(memory_at, MEMORY_COLUMN)) {
            (Ok(duration), Ok(memory)) => records.push(TraceRecord { duration, memory }),
            (Err(message), _) | (_, Err(message)) => bad.push(RowError { line, message }),
        }
    }
    if bad.is_empty() {
        Ok(records)
    } else {
        Err(WorkloadError::MalformedRows(bad))
    }
}

/// Nearest-rank percentile: the `ceil(q * N / 100)`-th smallest value.
pub fn percentile(values: &[u64], q: u32) -> Result<u64, WorkloadError> {
    if !(1..=100).contains(&q) {
        return Err(WorkloadError::BadPercentile(q));
    }
    if values.is_empty() {
        return Err(WorkloadError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let rank = (q as usize * sorted.len()).div_ceil(100);
    Ok(sorted[rank.max(1) - 1])
}

/// Jobs available for sampling, with the resource capacity they share.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobPool {
    /// `(p, req)` pairs in trace order.
    pub jobs: Vec<(Time, u64)>,
    pub capacity: u64,
    pub dropped_zero_duration: usize,
    pub dropped_by_filter: usize,
}

/// Drops zero-duration records, then every record above the 99th percentile
/// of duration or of memory (both taken over the nonzero-duration set). The
/// capacity is the largest surviving memory.
pub fn build_pool(records: &[TraceRecord]) -> Result<JobPool, WorkloadError> {
    let nonzero: Vec<TraceRecord> = records.iter().copied().filter(|r| r.duration > 0).collect();
    let dropped_zero_duration = records.len() - nonzero.len();
    if nonzero.is_empty() {
        return Err(WorkloadError::EmptyPool("all durations are zero"));
    }
    let durations: Vec<u64> = nonzero.iter().map(|r| r.duration).collect();
    let memories: Vec<u64> = nonzero.iter().map(|r| r.memory).collect();
    let max_duration = percentile(&durations, FILTER_PERCENTILE)?;
    let max_memory = percentile(&memories, FILTER_PERCENTILE)?;

    let jobs: Vec<(Time, u64)> = nonzero
        .iter()
        .filter(|r| r.duration <= max_duration && r.memory <= max_memory)
        .map(|r| (r.duration, r.memory))
        .collect();
    let dropped_by_filter = nonzero.len() - jobs.len();
    if jobs.is_empty() {
        return Err(WorkloadError::EmptyPool("the percentile filter removed every record"));
    }
    let capacity = jobs.iter().map(|&(_, req)| req).max().unwrap_or(0);
    if capacity == 0 {
        return Err(WorkloadError::ZeroCapacity);
    }
    Ok(JobPool {
        jobs,
        capacity,
        dropped_zero_duration,
        dropped_by_filter,
    })
}

/// Pool built from arbitrary `(p, req)` pairs, bypassing the trace filter.
pub fn pool_from_jobs(jobs: Vec<(Time, u64)>) -> Result<JobPool, WorkloadError> {
    if jobs.is_empty() {
        return Err(WorkloadError::EmptyPool("no jobs given"));
    }
    if let Some(i) = jobs.iter().position(|&(p, _)| p == 0) {
        return Err(ModelError::ZeroProcessingTime { id: i }.into());
    }
    let capacity = jobs.iter().map(|&(_, req)| req).max().unwrap_or(0);
    if capacity == 0 {
        return Err(WorkloadError::ZeroCapacity);
    }
    Ok(JobPool {
        jobs,
        capacity,
        dropped_zero_duration: 0,
        dropped_by_filter: 0,
    })
}

/// Trace-free pool: `size` jobs with `p` in `1..=1000` and memory in
/// `0..=1 << 20`, drawn from SplitMix64(`seed`).
pub fn synthetic_pool(size: usize, seed: u64) -> Result<JobPool, WorkloadError> {
    let mut rng = splitmix(seed);
    let jobs = (0..size)
        .map(|_| (1 + rng.next_u64() % 1000, rng.next_u64() % ((1 << 20) + 1)))
        .collect();
    pool_from_jobs(jobs)
}

/// Instance with `n` jobs, `p` uniform in `1..=max_p` and `req` uniform in
/// `0..=capacity`, drawn from SplitMix64(`seed`). Used for fuzzing.
pub fn uniform_instance(
    n: usize,
    m: usize,
    max_p: Time,
    capacity: u64,
    seed: u64,
) -> Result<Instance, WorkloadError> {
    let mut rng = splitmix(seed);
    let jobs: Vec<(Time, u64)> = (0..n)
        .map(|_| {
            let p = 1 + rng.next_u64() % max_p.max(1);
            (p, rng.next_u64() % (capacity + 1))
        })
        .collect();
    Ok(Instance::new(m, capacity, jobs)?)
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman(pairs: &[(i64, i64)]) -> Result<f64, WorkloadError> {
    if pairs.len() < 2 {
        return Err(WorkloadError::Degenerate);
    }
    let xs = average_ranks(pairs.iter().map(|&(x, _)| x));
    let ys = average_ranks(pairs.iter().map(|&(_, y)| y));
    let n = pairs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut cov, mut var_x, mut var_y) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(WorkloadError::Degenerate);
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
fn average_ranks<I: IntoIterator<Item = i64>>(values: I) -> Vec<f64> {
    let values: Vec<i64> = values.into_iter().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Draws `n` pool jobs uniformly with replacement. Draws with `max p >= L`
/// are rejected and retried with `seed + 1`, `seed + 2`, and so on.
pub fn sample_instance(
    pool: &JobPool,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<Instance, WorkloadError> {
    if n == 0 || m == 0 {
        return Err(WorkloadError::BadDimensions);
    }
    if pool.jobs.is_empty() {
        return Err(WorkloadError::EmptyPool("pool has no jobs"));
    }
    for attempt in 0..=MAX_RETRIES {
        let mut rng = splitmix(seed.wrapping_add(attempt));
        let jobs: Vec<(Time, u64)> = (0..n)
            .map(|_| pool.jobs[(rng.next_u64() % pool.jobs.len() as u64) as usize])
            .collect();
        let instance = Instance::new(m, pool.capacity, jobs)?;
        if is_nontrivial(&instance) {
            return Ok(instance);
        }
    }
    Err(WorkloadError::Rejected {
        attempts: MAX_RETRIES + 1,
    })
}

/// `max p < L`, so the longest job alone does not decide the bound.
pub fn is_nontrivial(instance: &Instance) -> bool {
    let longest = instance.jobs().iter().map(|j| j.p).max().unwrap_or(0);
    Ratio::from_integer(longest as i128) < lower_bound(instance)
}

/// `key=value` summary of a pool: size, capacity, drop counts and the
/// quartiles of `r = req / capacity`.
pub fn pool_summary(pool: &JobPool) -> String {
    let reqs: Vec<u64> = pool.jobs.iter().map(|&(_, req)| req).collect();
    let mut out = format!(
        "count={}\ncapacity={}\ndropped_zero_duration={}\ndropped_by_filter={}\n",
        pool.jobs.len(),
        pool.capacity,
        pool.dropped_zero_duration,
        pool.dropped_by_filter
    );
    for q in [25, 50, 75] {
        let value = percentile(&reqs, q).map_or_else(
            |_| "nan".to_string(),
            |req| format_decimal(&ratio(req as u128, pool.capacity as u128), 6),
        );
        out.push_str(&format!("r_p{q}={value}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_rows_in_order() {
        let csv = "job,duration_s,memory_bytes\na,3600,1073741824\nb,5,7\n";
        let records = parse_trace(csv.as_bytes()).unwrap();
        assert_eq!(
            records,
            vec![
                TraceRecord { duration: 3600, memory: 1_073_741_824 },
                TraceRecord { duration: 5, memory: 7 },
            ]
        );
        assert!(parse_trace("duration_s,memory_bytes\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn reports_malformed_rows_with_lines() {
        let csv = "duration_s,memory_bytes\n1,2\nabc,5\n3,-4\n5,6\n";
        match parse_trace(csv.as_bytes()) {
            Err(WorkloadError::MalformedRows(rows)) => {
                let lines: Vec<u64> = rows.iter().map(|r| r.line).collect();
                assert_eq!(lines, vec![3, 4]);
            }
            other => panic!("expected row errors, got {other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let err = parse_trace("duration_s,mem\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, WorkloadError::MissingColumn(MEMORY_COLUMN)));
    }

    #[test]
    fn percentile_examples() {
        let hundred: Vec<u64> = (1..=100).collect();
        assert_eq!(percentile(&hundred, 99).unwrap(), 99);
        let tens: Vec<u64> = (1..=10).map(|i| i * 10).collect();
        assert_eq!(percentile(&tens, 50).unwrap(), 50);
        assert_eq!(percentile(&[7], 1).unwrap(), 7);
        assert_eq!(percentile(&[7], 100).unwrap(), 7);
        assert!(matches!(percentile(&[], 50), Err(WorkloadError::EmptySample)));
        assert!(matches!(percentile(&[1], 0), Err(WorkloadError::BadPercentile(0))));
    }

    #[test]
    fn pool_examples() {
        let records: Vec<TraceRecord> = (1..=100)
            .map(|memory| TraceRecord { duration: 10, memory })
            .collect();
        let pool = build_pool(&records).unwrap();
        assert_eq!(pool.capacity, 99);
        assert_eq!(pool.jobs.len(), 99);
        assert_eq!(pool.dropped_by_filter, 1);

        let one = build_pool(&[TraceRecord { duration: 5, memory: 8 }]).unwrap();
        assert_eq!(one.capacity, 8);
        assert_eq!(one.jobs, vec![(5, 8)]);

        let zeros = [TraceRecord { duration: 0, memory: 8 }; 3];
        assert!(matches!(build_pool(&zeros), Err(WorkloadError::EmptyPool(_))));
    }

    #[test]
    fn zero_durations_are_dropped_before_percentiles() {
        let mut records = vec![TraceRecord { duration: 0, memory: 1000 }; 50];
        records.push(TraceRecord { duration: 4, memory: 3 });
        let pool = build_pool(&records).unwrap();
        assert_eq!(pool.dropped_zero_duration, 50);
        assert_eq!(pool.jobs, vec![(4, 3)]);
        assert_eq!(pool.capacity, 3);
    }

    #[test]
    fn spearman_examples() {
        let up: Vec<(i64, i64)> = (0..10).map(|i| (i, i * i)).collect();
        assert!((spearman(&up).unwrap() - 1.0).abs() < 1e-12);
        let down: Vec<(i64, i64)> = (0..10).map(|i| (i, -i)).collect();
        assert!((spearman(&down).unwrap() + 1.0).abs() < 1e-12);
        assert!(spearman(&[(1, 2)]).is_err());
        assert!(spearman(&[(1, 2), (1, 3)]).is_err());
    }

    #[test]
    fn spearman_with_ties() {
        // ranks x: 1, 2.5, 2.5, 4; y: 1, 2, 3, 4
        let pairs = [(1, 10), (2, 20), (2, 30), (3, 40)];
        let expected = 4.5 / (4.5f64 * 5.0).sqrt();
        assert!((spearman(&pairs).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seeded_and_filtered() {
        let pool = pool_from_jobs((1..=40).map(|i| (i, i * 3 % 17)).collect()).unwrap();
        let a = sample_instance(&pool, 20, 3, 9).unwrap();
        let b = sample_instance(&pool, 20, 3, 9).unwrap();
        assert_eq!(a.jobs(), b.jobs());
        assert_eq!(a.capacity(), pool.capacity);
        assert!(is_nontrivial(&a));
        for job in a.jobs() {
            assert!(pool.jobs.contains(&(job.p, job.req)));
        }
    }

    #[test]
    fn degenerate_pool_is_rejected() {
        let pool = pool_from_jobs(vec![(100, 1)]).unwrap();
        assert!(matches!(
            sample_instance(&pool, 1, 1, 0),
            Err(WorkloadError::Rejected { attempts: 1001 })
        ));
    }

    #[test]
    fn summary_lists_quartiles() {
        let pool = pool_from_jobs(vec![(1, 1), (1, 2), (1, 3), (1, 4)]).unwrap();
        let summary = pool_summary(&pool);
        assert!(summary.contains("count=4\n"));
        assert!(summary.contains("capacity=4\n"));
        assert!(summary.contains("r_p25=0.250000\n"));
        assert!(summary.contains("r_p50=0.500000\n"));
        assert!(summary.contains("r_p75=0.750000\n"));
    }

    proptest! {
        #[test]
        fn filter_keeps_only_records_under_both_thresholds(
            raw in prop::collection::vec((0u64..50, 0u64..1000), 1..200)
        ) {
            let records: Vec<TraceRecord> = raw
                .iter()
                .map(|&(duration, memory)| TraceRecord { duration, memory })
                .collect();
            let Ok(pool) = build_pool(&records) else { return Ok(()); };
            let nonzero: Vec<&TraceRecord> = records.iter().filter(|r| r.duration > 0).collect();
            let d99 = percentile(&nonzero.iter().map(|r| r.duration).collect::<Vec<_>>(), 99).unwrap();
            let m99 = percentile(&nonzero.iter().map(|r| r.memory).collect::<Vec<_>>(), 99).unwrap();
            for &(p, req) in &pool.jobs {
                prop_assert!(p >= 1 && p <= d99);
                prop_assert!(req <= m99 && req <= pool.capacity);
            }
            prop_assert!(pool.jobs.iter().any(|&(_, req)| req == pool.capacity));
        }

        #[test]
        fn spearman_flips_sign_with_reversed_y(
            pairs in prop::collection::vec((-50i64..50, -50i64..50), 2..60)
        ) {
            let flipped: Vec<(i64, i64)> = pairs.iter().map(|&(x, y)| (x, -y)).collect();
            match (spearman(&pairs), spearman(&flipped)) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((-1.0..=1.0).contains(&a));
                    prop_assert!((a + b).abs() < 1e-9);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "degeneracy must not depend on the sign"),
            }
        }

        #[test]
        fn percentile_is_a_member_with_enough_below(
            values in prop::collection::vec(0u64..100, 1..50),
            q in 1u32..=100
        ) {
            let v = percentile(&values, q).unwrap();
            prop_assert!(values.contains(&v));
            let at_most = values.iter().filter(|&&x| x <= v).count();
            prop_assert!(at_most * 100 >= q as usize * values.len());
        }
    }
}
