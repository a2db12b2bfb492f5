//! Feasibility checks for schedules.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::model::Time;
use crate::profile::ResourceProfile;
use crate::schedule::{Assignment, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    MachineOverlap,
    ResourceOverflow,
    MachineCountExceeded,
    UnknownJob,
    DuplicateJob,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::MachineOverlap => "MACHINE_OVERLAP",
            ViolationKind::ResourceOverflow => "RESOURCE_OVERFLOW",
            ViolationKind::MachineCountExceeded => "MACHINE_COUNT_EXCEEDED",
            ViolationKind::UnknownJob => "UNKNOWN_JOB",
            ViolationKind::DuplicateJob => "DUPLICATE_JOB",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// First time at which this kind of violation occurs.
    pub time: Time,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at t={}: {}", self.kind, self.time, self.detail)
    }
}

/// Outcome of [`validate`]: at most one entry per violation kind, carrying the
/// earliest offending time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn record(&mut self, kind: ViolationKind, time: Time, detail: String) {
        match self.violations.iter_mut().find(|v| v.kind == kind) {
            Some(v) if time < v.time => {
                v.time = time;
                v.detail = detail;
            }
            Some(_) => {}
            None => self.violations.push(Violation { kind, time, detail }),
        }
    }
}

/// Checks machine exclusivity, the resource capacity and the machine count at
/// every breakpoint, plus job identity. Partial schedules are allowed.
pub fn validate(schedule: &Schedule<'_>) -> ValidationReport {
    let instance = schedule.instance();
    let mut report = ValidationReport::default();

    let mut seen = HashSet::new();
    let mut known: Vec<(&Assignment, u64)> = Vec::with_capacity(schedule.len());
    for a in schedule.assignments() {
        match instance.job(a.job) {
            None => report.record(
                ViolationKind::UnknownJob,
                a.start,
                format!("job {} is not in the instance", a.job),
            ),
            Some(job) => {
                if !seen.insert(a.job) {
                    report.record(
                        ViolationKind::DuplicateJob,
                        a.start,
                        format!("job {} assigned more than once", a.job),
                    );
                }
                known.push((a, job.req));
            }
        }
        if a.machine >= instance.machines() {
            report.record(
                ViolationKind::MachineCountExceeded,
                a.start,
                format!(
                    "job {} on machine {} but only {} machines exist",
                    a.job,
                    a.machine,
                    instance.machines()
                ),
            );
        }
    }

    let mut per_machine: BTreeMap<usize, Vec<&Assignment>> = BTreeMap::new();
    for a in schedule.assignments() {
        per_machine.entry(a.machine).or_default().push(a);
    }
    for (machine, mut list) in per_machine {
        list.sort_by_key(|a| (a.start, a.completion, a.job));
        for w in list.windows(2) {
            if w[1].start < w[0].completion {
                report.record(
                    ViolationKind::MachineOverlap,
                    w[1].start,
                    format!(
                        "jobs {} and {} overlap on machine {}",
                        w[0].job, w[1].job, machine
                    ),
                );
            }
        }
    }

    let usage =
        ResourceProfile::from_intervals(known.iter().map(|&(a, req)| (a.start, a.completion, req)));
    if let Some(&(t, u)) = usage
        .breakpoints()
        .iter()
        .find(|&&(_, u)| u > instance.capacity())
    {
        report.record(
            ViolationKind::ResourceOverflow,
            t,
            format!("usage {} exceeds capacity {}", u, instance.capacity()),
        );
    }

    let count = ResourceProfile::from_intervals(
        schedule
            .assignments()
            .iter()
            .map(|a| (a.start, a.completion, 1)),
    );
    if let Some(&(t, c)) = count
        .breakpoints()
        .iter()
        .find(|&&(_, c)| c as usize > instance.machines())
    {
        report.record(
            ViolationKind::MachineCountExceeded,
            t,
            format!("{} jobs active on {} machines", c, instance.machines()),
        );
    }

    report.violations.sort_by_key(|v| (v.time, v.kind));
    report
}
