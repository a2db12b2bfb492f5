//! Name-addressable solvers.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use thiserror::Error;

use orthosched::approx::{apalg, apalg_h, apalg_s, ApproxError};
use orthosched::list::{list_schedule, OrderPolicy};
use orthosched::{Instance, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum Algorithm {
    #[value(name = "apalg")]
    ApAlg,
    #[value(name = "apalg-s")]
    ApAlgS,
    #[value(name = "apalg-h")]
    ApAlgH,
    Lpt,
    Hrr,
    Lrr,
    Rand,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::ApAlg,
        Algorithm::ApAlgS,
        Algorithm::ApAlgH,
        Algorithm::Lpt,
        Algorithm::Hrr,
        Algorithm::Lrr,
        Algorithm::Rand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ApAlg => "apalg",
            Algorithm::ApAlgS => "apalg-s",
            Algorithm::ApAlgH => "apalg-h",
            Algorithm::Lpt => "lpt",
            Algorithm::Hrr => "hrr",
            Algorithm::Lrr => "lrr",
            Algorithm::Rand => "rand",
        }
    }

    /// Runs the solver. `seed` only matters for `rand`.
    pub fn solve(self, instance: &Instance, seed: u64) -> Result<Schedule<'_>, ApproxError> {
        Ok(match self {
            Algorithm::ApAlg => apalg(instance)?.0,
            Algorithm::ApAlgS => apalg_s(instance)?.0,
            Algorithm::ApAlgH => apalg_h(instance)?.0,
            Algorithm::Lpt => list_schedule(instance, OrderPolicy::Lpt),
            Algorithm::Hrr => list_schedule(instance, OrderPolicy::Hrr),
            Algorithm::Lrr => list_schedule(instance, OrderPolicy::Lrr),
            Algorithm::Rand => list_schedule(instance, OrderPolicy::Rand(seed)),
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (expected one of apalg, apalg-s, apalg-h, lpt, hrr, lrr, rand)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}
