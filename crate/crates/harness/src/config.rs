//! Bench configuration: a flat `key=value` file, one key per line, lists
//! comma-separated, `#` starts a comment line.
//!
//! ```text
//! trace=zapat.csv
//! ns=500,1000
//! ms=10,20
//! reps=30
//! seed=1
//! algos=apalg,apalg-s,hrr
//! out=rows.csv
//! ```
//!
//! `instance=<file>` may replace `trace`: every repetition then runs that
//! fixed instance and `ns`/`ms` are not used.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::algo::Algorithm;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Trace(PathBuf),
    Instance(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub source: Source,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("key `{key}`: {message}")]
    BadValue { key: &'static str, message: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("`trace` and `instance` are mutually exclusive")]
    TwoSources,
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
}

const KEYS: [&str; 8] = ["trace", "instance", "ns", "ms", "reps", "seed", "algos", "out"];

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::parse(&text)?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        config.source = match config.source {
            Source::Trace(p) => Source::Trace(base.join(p)),
            Source::Instance(p) => Source::Instance(base.join(p)),
        };
        config.out = config.out.map(|p| base.join(p));
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values: Vec<(&'static str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey { line: i + 1, key: key.into() });
            };
            if values.iter().any(|&(k, _)| k == known) {
                return Err(ConfigError::DuplicateKey { line: i + 1, key: key.into() });
            }
            values.push((known, value.trim()));
        }
        let get = |key: &str| values.iter().find(|&&(k, _)| k == key).map(|&(_, v)| v);

        let source = match (get("trace"), get("instance")) {
            (Some(_), Some(_)) => return Err(ConfigError::TwoSources),
            (Some(t), None) => Source::Trace(t.into()),
            (None, Some(i)) => Source::Instance(i.into()),
            (None, None) => return Err(ConfigError::Missing("trace")),
        };
        let fixed = matches!(source, Source::Instance(_));
        let list = |key: &'static str| -> Result<Vec<usize>, ConfigError> {
            match get(key) {
                None if fixed => Ok(Vec::new()),
                None => Err(ConfigError::Missing(key)),
                Some(v) => parse_list(key, v),
            }
        };
        let ns = list("ns")?;
        let ms = list("ms")?;
        if ns.iter().chain(&ms).any(|&x| x == 0) {
            return Err(ConfigError::BadValue { key: "ns/ms", message: "values must be positive".into() });
        }
        let reps = parse_one("reps", get("reps").ok_or(ConfigError::Missing("reps"))?)?;
        if reps == 0 {
            return Err(ConfigError::BadValue { key: "reps", message: "must be at least 1".into() });
        }
        let seed = parse_one("seed", get("seed").unwrap_or("0"))?;
        let algorithms: Vec<Algorithm> = get("algos")
            .ok_or(ConfigError::Missing("algos"))?
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e: crate::algo::UnknownAlgorithm| ConfigError::BadValue {
                    key: "algos",
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        if algorithms.is_empty() {
            return Err(ConfigError::BadValue { key: "algos", message: "needs at least one algorithm".into() });
        }
        Ok(BenchConfig {
            source,
            ns,
            ms,
            reps,
            seed,
            algorithms,
            out: get("out").filter(|s| !s.is_empty()).map(PathBuf::from),
        })
    }
}

fn parse_one<T: FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key,
        message: format!("`{value}` is not a valid number"),
    })
}

fn parse_list(key: &'static str, value: &str) -> Result<Vec<usize>, ConfigError> {
    let items: Vec<usize> = value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::BadValue { key, message: "empty list".into() });
    }
    Ok(items)
}
