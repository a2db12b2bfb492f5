//! Per-cell aggregation of bench rows.

use std::fmt::Write;

use orthosched::{format_decimal, Ratio};

use crate::algo::Algorithm;
use crate::bench::BenchRow;

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub algorithm: Algorithm,
    pub count: usize,
    pub min: Ratio,
    pub median: Ratio,
    pub max: Ratio,
    pub median_runtime_ms: f64,
}

/// Groups solved rows by (n, m, algorithm) in first-seen order. Skipped rows
/// are left out.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    type Key = (usize, usize, Algorithm);
    let mut groups: Vec<(Key, Vec<Ratio>, Vec<f64>)> = Vec::new();
    for row in rows {
        let (Some(algorithm), Some(value), Some(runtime)) =
            (row.algorithm(), row.normalized_cmax(), row.runtime_ms())
        else {
            continue;
        };
        let key = (row.n, row.m, algorithm);
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, values, runtimes)) => {
                values.push(value);
                runtimes.push(runtime);
            }
            None => groups.push((key, vec![value], vec![runtime])),
        }
    }
    groups
        .into_iter()
        .map(|((n, m, algorithm), mut values, mut runtimes)| {
            values.sort();
            runtimes.sort_by(f64::total_cmp);
            SummaryRow {
                n,
                m,
                algorithm,
                count: values.len(),
                min: values[0],
                median: median(&values, |a, b| (a + b) / Ratio::from_integer(2)),
                max: values[values.len() - 1],
                median_runtime_ms: median(&runtimes, |a, b| (a + b) / 2.0),
            }
        })
        .collect()
}

/// Median of a sorted nonempty slice; an even count averages the two middle values.
fn median<T: Copy>(sorted: &[T], mean: impl Fn(T, T) -> T) -> T {
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        mean(sorted[mid - 1], sorted[mid])
    }
}

/// CSV rendering. Without the runtime column the output depends only on the
/// config and seed.
pub fn render(summary: &[SummaryRow], with_runtime: bool) -> String {
    let mut out = String::from("n,m,algorithm,count,min_normalized_cmax,median_normalized_cmax,max_normalized_cmax");
    if with_runtime {
        out.push_str(",median_runtime_ms");
    }
    out.push('\n');
    for s in summary {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            s.n,
            s.m,
            s.algorithm,
            s.count,
            format_decimal(&s.min, 6),
            format_decimal(&s.median, 6),
            format_decimal(&s.max, 6)
        );
        if with_runtime {
            let _ = write!(out, ",{:.3}", s.median_runtime_ms);
        }
        out.push('\n');
    }
    out
}
