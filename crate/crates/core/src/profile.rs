//! Piecewise-constant resource usage over time.

use std::collections::BTreeMap;

use crate::model::Time;
use crate::schedule::{Schedule, ScheduleError};

/// Right-continuous step function `t -> usage`. Each breakpoint `(time, usage)`
/// holds on `[time, next_time)`; usage before the first breakpoint and after
/// the last one is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceProfile {
    breakpoints: Vec<(Time, u64)>,
}

impl ResourceProfile {
    /// Builds the profile of `[start, end) -> amount` intervals.
    pub fn from_intervals<I>(intervals: I) -> Self
    where
        I: IntoIterator<Item = (Time, Time, u64)>,
    {
        let mut deltas: BTreeMap<Time, i128> = BTreeMap::new();
        for (start, end, amount) in intervals {
            *deltas.entry(start).or_default() += amount as i128;
            *deltas.entry(end).or_default() -= amount as i128;
        }
        let mut level: i128 = 0;
        let breakpoints = deltas
            .into_iter()
            .map(|(t, d)| {
                level += d;
                (t, level as u64)
            })
            .collect();
        ResourceProfile { breakpoints }
    }

    pub fn breakpoints(&self) -> &[(Time, u64)] {
        &self.breakpoints
    }

    /// Usage at `t`, by binary search.
    pub fn usage(&self, t: Time) -> u64 {
        match self.breakpoints.partition_point(|&(bt, _)| bt <= t) {
            0 => 0,
            i => self.breakpoints[i - 1].1,
        }
    }

    pub fn peak(&self) -> u64 {
        self.breakpoints.iter().map(|&(_, u)| u).max().unwrap_or(0)
    }
}

/// Resource profile of a schedule; breakpoints sit exactly at the distinct
/// start and completion times.
pub fn resource_profile(schedule: &Schedule<'_>) -> Result<ResourceProfile, ScheduleError> {
    let instance = schedule.instance();
    let mut intervals = Vec::with_capacity(schedule.len());
    for a in schedule.assignments() {
        let job = instance.job(a.job).ok_or(ScheduleError::UnknownJob(a.job))?;
        intervals.push((a.start, a.completion, job.req));
    }
    Ok(ResourceProfile::from_intervals(intervals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;
    use proptest::prelude::*;

    #[test]
    fn single_job() {
        let inst = Instance::new(1, 10, vec![(3, 5)]).unwrap();
        let mut s = Schedule::new(&inst);
        s.assign(0, 0, 2).unwrap();
        let prof = resource_profile(&s).unwrap();
        assert_eq!(prof.breakpoints(), &[(2, 5), (5, 0)]);
        assert_eq!(prof.usage(0), 0);
        assert_eq!(prof.usage(1), 0);
        assert_eq!(prof.usage(2), 5);
        assert_eq!(prof.usage(4), 5);
        assert_eq!(prof.usage(5), 0);
        assert_eq!(prof.usage(100), 0);
    }

    #[test]
    fn overlap() {
        let inst = Instance::new(2, 10, vec![(2, 6), (2, 3)]).unwrap();
        let mut s = Schedule::new(&inst);
        s.assign(0, 0, 0).unwrap();
        s.assign(1, 1, 1).unwrap();
        let prof = resource_profile(&s).unwrap();
        assert_eq!(prof.usage(0), 6);
        assert_eq!(prof.usage(1), 9);
        assert_eq!(prof.usage(2), 3);
        assert_eq!(prof.usage(3), 0);
        assert_eq!(prof.peak(), 9);
    }

    #[test]
    fn empty_profile() {
        let inst = Instance::new(1, 10, vec![]).unwrap();
        let prof = resource_profile(&Schedule::new(&inst)).unwrap();
        assert!(prof.breakpoints().is_empty());
        assert_eq!(prof.usage(7), 0);
    }

    #[test]
    fn unknown_job() {
        let inst = Instance::new(1, 10, vec![(1, 1)]).unwrap();
        let mut s = Schedule::new(&inst);
        s.push_unchecked(crate::schedule::Assignment {
            job: 9,
            machine: 0,
            start: 0,
            completion: 1,
        });
        assert!(matches!(
            resource_profile(&s),
            Err(ScheduleError::UnknownJob(9))
        ));
    }

    proptest! {
        #[test]
        fn usage_matches_active_jobs(
            jobs in prop::collection::vec((1u64..6, 0u64..10, 0u64..15), 0..10)
        ) {
            let inst = Instance::new(jobs.len().max(1), 100, jobs.iter().map(|&(p, r, _)| (p, r))).unwrap();
            let mut s = Schedule::new(&inst);
            for (i, &(_, _, start)) in jobs.iter().enumerate() {
                s.assign(i, i, start).unwrap();
            }
            let prof = resource_profile(&s).unwrap();
            let mut probes: Vec<Time> = vec![0];
            for w in prof.breakpoints().windows(2) {
                probes.push(w[0].0);
                probes.push((w[0].0 + w[1].0) / 2);
            }
            if let Some(&(t, _)) = prof.breakpoints().last() {
                probes.push(t);
                probes.push(t + 1);
            }
            for t in probes {
                let expected: u64 = s
                    .active_jobs(t)
                    .into_iter()
                    .map(|id| inst.job(id).unwrap().req)
                    .sum();
                prop_assert_eq!(prof.usage(t), expected);
            }
        }
    }
}
