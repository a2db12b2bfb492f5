//! Greedy list scheduling baselines (LPT, HRR, LRR and a seeded random order).

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use crate::model::{Instance, JobId, Time};
use crate::rng::{shuffle, splitmix};
use crate::schedule::{Assignment, Schedule};

/// Priority order of the list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderPolicy {
    /// Longest processing time first.
    Lpt,
    /// Highest resource requirement first.
    Hrr,
    /// Lowest resource requirement first.
    Lrr,
    /// Seeded Fisher-Yates shuffle of the instance order.
    Rand(u64),
}

impl fmt::Display for OrderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderPolicy::Lpt => f.write_str("lpt"),
            OrderPolicy::Hrr => f.write_str("hrr"),
            OrderPolicy::Lrr => f.write_str("lrr"),
            OrderPolicy::Rand(seed) => write!(f, "rand({seed})"),
        }
    }
}

/// The list induced by `policy`. Sorts are stable with ties on ascending id.
pub fn order_jobs(instance: &Instance, policy: OrderPolicy) -> Vec<JobId> {
    let mut jobs: Vec<_> = instance.jobs().iter().collect();
    match policy {
        OrderPolicy::Lpt => jobs.sort_by_key(|j| (Reverse(j.p), j.id)),
        OrderPolicy::Hrr => jobs.sort_by_key(|j| (Reverse(j.req), j.id)),
        OrderPolicy::Lrr => jobs.sort_by_key(|j| (j.req, j.id)),
        OrderPolicy::Rand(seed) => shuffle(&mut jobs, &mut splitmix(seed)),
    }
    jobs.into_iter().map(|j| j.id).collect()
}

/// Remaining list, answering "first job on the list with req <= avail".
trait Pending {
    fn take_first_fitting(&mut self, avail: u64) -> Option<JobId>;
    fn is_empty(&self) -> bool;
}

/// Linear scan in list order.
struct Scan {
    entries: BTreeSet<(usize, JobId, u64)>,
}

impl Pending for Scan {
    fn take_first_fitting(&mut self, avail: u64) -> Option<JobId> {
        let hit = *self.entries.iter().find(|&&(_, _, req)| req <= avail)?;
        self.entries.remove(&hit);
        Some(hit.1)
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// HRR: the first fitting job is the one with the largest req <= avail,
/// smallest id among equals.
struct ByDecreasingReq {
    entries: BTreeSet<(u64, Reverse<JobId>)>,
}

impl Pending for ByDecreasingReq {
    fn take_first_fitting(&mut self, avail: u64) -> Option<JobId> {
        let hit = *self.entries.range(..=(avail, Reverse(0))).next_back()?;
        self.entries.remove(&hit);
        Some(hit.1 .0)
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// LRR: only the head of the list can fit if anything does.
struct ByIncreasingReq {
    entries: BTreeSet<(u64, JobId)>,
}

impl Pending for ByIncreasingReq {
    fn take_first_fitting(&mut self, avail: u64) -> Option<JobId> {
        let &(req, id) = self.entries.first()?;
        if req > avail {
            return None;
        }
        self.entries.pop_first();
        Some(id)
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Event-driven list scheduling. At time 0 and at every completion time,
/// completions are applied first; then, while a machine is free, the first
/// job on the list that fits the free resource starts on the lowest free
/// machine.
///
/// HRR and LRR use a req-indexed set instead of a scan; the result is the same
/// as [`list_schedule_scan`].
pub fn list_schedule(instance: &Instance, policy: OrderPolicy) -> Schedule<'_> {
    let order = order_jobs(instance, policy);
    match policy {
        OrderPolicy::Hrr => {
            let entries = order
                .iter()
                .map(|&id| (req_of(instance, id), Reverse(id)))
                .collect();
            simulate(instance, ByDecreasingReq { entries })
        }
        OrderPolicy::Lrr => {
            let entries = order.iter().map(|&id| (req_of(instance, id), id)).collect();
            simulate(instance, ByIncreasingReq { entries })
        }
        _ => simulate(instance, scan_of(instance, &order)),
    }
}

/// [`list_schedule`] with a plain scan of the list for every policy.
pub fn list_schedule_scan(instance: &Instance, policy: OrderPolicy) -> Schedule<'_> {
    let order = order_jobs(instance, policy);
    simulate(instance, scan_of(instance, &order))
}

/// Runs an explicit list; `order` must be a permutation of the job ids.
pub fn list_schedule_order<'a>(instance: &'a Instance, order: &[JobId]) -> Schedule<'a> {
    simulate(instance, scan_of(instance, order))
}

fn req_of(instance: &Instance, id: JobId) -> u64 {
    instance.job(id).expect("ordered ids come from the instance").req
}

fn scan_of(instance: &Instance, order: &[JobId]) -> Scan {
    Scan {
        entries: order
            .iter()
            .enumerate()
            .map(|(pos, &id)| (pos, id, req_of(instance, id)))
            .collect(),
    }
}

fn simulate<P: Pending>(instance: &Instance, mut pending: P) -> Schedule<'_> {
    let mut schedule = Schedule::new(instance);
    let capacity = instance.capacity();
    let mut free: BTreeSet<usize> = (0..instance.machines()).collect();
    let mut running: BinaryHeap<Reverse<(Time, usize, u64)>> = BinaryHeap::new();
    let mut usage: u64 = 0;
    let mut now: Time = 0;

    loop {
        while let Some(&machine) = free.first() {
            let Some(id) = pending.take_first_fitting(capacity - usage) else {
                break;
            };
            let job = instance.job(id).expect("pending ids come from the instance");
            free.pop_first();
            usage += job.req;
            running.push(Reverse((now + job.p, machine, job.req)));
            schedule.push_unchecked(Assignment {
                job: id,
                machine,
                start: now,
                completion: now + job.p,
            });
        }
        if pending.is_empty() {
            break;
        }
        let Some(&Reverse((next, _, _))) = running.peek() else {
            unreachable!("an idle system always fits the next job");
        };
        now = next;
        while let Some(&Reverse((end, machine, req))) = running.peek() {
            if end != now {
                break;
            }
            running.pop();
            usage -= req;
            free.insert(machine);
        }
    }
    schedule
}
