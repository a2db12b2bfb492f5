//! Command-line front end and benchmark harness for `orthosched`.

pub mod algo;
pub mod bench;
pub mod cli;
pub mod config;
pub mod summary;

pub use algo::Algorithm;
pub use bench::{run_bench, BenchRow, Outcome};
pub use config::BenchConfig;
pub use summary::{render, summarize, SummaryRow};
