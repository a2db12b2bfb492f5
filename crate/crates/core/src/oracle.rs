//! Exact optimal makespan for small instances.
//!
//! Some optimal schedule starts every job at 0 or at a completion time, so
//! the search walks event times and branches on the subset of pending jobs
//! that start at each one.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::bounds::lower_bound;
use crate::list::{list_schedule, OrderPolicy};
use crate::model::{Instance, Time};
use crate::ratio::{to_i128, Ratio};
use crate::schedule::{Assignment, Schedule};

/// Default node budget used by the CLI and tests.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search exhausted its node budget; {opt} is only an upper bound")]
    NotExhausted { opt: Time },
    #[error("optimum is 0 on a nonempty instance")]
    ZeroOptimum,
}

#[derive(Clone, Debug)]
pub struct OracleResult<'a> {
    /// Optimal makespan when `exhausted`, otherwise the best one found.
    pub opt: Time,
    pub optimal_schedule: Schedule<'a>,
    pub nodes_explored: u64,
    /// The search finished within the budget.
    pub exhausted: bool,
}

struct Search<'a> {
    instance: &'a Instance,
    p: Vec<Time>,
    req: Vec<u64>,
    /// Earlier job with identical (p, req), which must start no later.
    twin_before: Vec<Option<usize>>,
    start: Vec<Option<Time>>,
    best: Time,
    best_starts: Vec<Time>,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
}

/// Branch-and-bound optimum within `node_budget` search nodes.
pub fn optimal_makespan(instance: &Instance, node_budget: u64) -> OracleResult<'_> {
    let jobs = instance.jobs();
    let n = jobs.len();
    let incumbent = list_schedule(instance, OrderPolicy::Lpt);
    let best_starts = jobs
        .iter()
        .map(|j| incumbent.get(j.id).expect("list schedules are complete").start)
        .collect();

    let mut twin_before = vec![None; n];
    for i in 0..n {
        twin_before[i] = (0..i)
            .rev()
            .find(|&k| jobs[k].p == jobs[i].p && jobs[k].req == jobs[i].req);
    }

    let mut search = Search {
        instance,
        p: jobs.iter().map(|j| j.p).collect(),
        req: jobs.iter().map(|j| j.req).collect(),
        twin_before,
        start: vec![None; n],
        best: incumbent.makespan(),
        best_starts,
        nodes: 0,
        budget: node_budget.max(1),
        out_of_budget: false,
    };
    let pending: Vec<usize> = (0..n).collect();
    if n > 0 {
        search.branch(0, &[], &pending);
    }

    let optimal_schedule = assign_machines(instance, &search.best_starts);
    OracleResult {
        opt: search.best,
        optimal_schedule,
        nodes_explored: search.nodes,
        exhausted: !search.out_of_budget,
    }
}

impl Search<'_> {
    /// `running` holds (completion, position) of jobs active at `now`.
    fn branch(&mut self, now: Time, running: &[(Time, usize)], pending: &[usize]) {
        if self.out_of_budget {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.out_of_budget = true;
            return;
        }
        if self.bound(now, running, pending) >= self.best {
            return;
        }

        let free_machines = self.instance.machines() - running.len();
        let free_resource =
            self.instance.capacity() - running.iter().map(|&(_, i)| self.req[i]).sum::<u64>();
        let candidates: Vec<usize> = pending
            .iter()
            .copied()
            .filter(|&i| self.req[i] <= free_resource)
            .collect();

        let mut chosen = Vec::new();
        let mut subsets = Vec::new();
        self.subsets(&candidates, 0, free_machines, free_resource, &mut chosen, &mut subsets);
        // larger starts first tends to find good incumbents early
        subsets.sort_by_key(|s| Reverse(s.len()));

        for subset in subsets {
            if subset.is_empty() && running.is_empty() {
                continue;
            }
            for &i in &subset {
                self.start[i] = Some(now);
            }
            let rest: Vec<usize> = pending
                .iter()
                .copied()
                .filter(|i| !subset.contains(i))
                .collect();
            let mut next_running = running.to_vec();
            next_running.extend(subset.iter().map(|&i| (now + self.p[i], i)));

            if rest.is_empty() {
                let makespan = next_running.iter().map(|&(c, _)| c).max().unwrap_or(now);
                if makespan < self.best {
                    self.best = makespan;
                    self.best_starts = self.start.iter().map(|s| s.unwrap()).collect();
                }
            } else {
                let next = next_running.iter().map(|&(c, _)| c).min().unwrap();
                next_running.retain(|&(c, _)| c > next);
                self.branch(next, &next_running, &rest);
            }
            for &i in &subset {
                self.start[i] = None;
            }
            if self.out_of_budget {
                return;
            }
        }
    }

    /// Enumerates subsets of `candidates[from..]` that fit the free machines
    /// and resource and respect twin order.
    fn subsets(
        &self,
        candidates: &[usize],
        from: usize,
        machines: usize,
        resource: u64,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if from == candidates.len() {
            out.push(chosen.clone());
            return;
        }
        let i = candidates[from];
        self.subsets(candidates, from + 1, machines, resource, chosen, out);
        let twin_ready = match self.twin_before[i] {
            None => true,
            Some(k) => self.start[k].is_some() || chosen.contains(&k),
        };
        if machines > 0 && self.req[i] <= resource && twin_ready {
            chosen.push(i);
            self.subsets(
                candidates,
                from + 1,
                machines - 1,
                resource - self.req[i],
                chosen,
                out,
            );
            chosen.pop();
        }
    }

    /// Lower bound on any completion of this partial schedule.
    fn bound(&self, now: Time, running: &[(Time, usize)], pending: &[usize]) -> Time {
        let m = self.instance.machines() as u128;
        let cap = self.instance.capacity() as u128;
        let mut work: u128 = 0;
        let mut area: u128 = 0;
        let mut longest = now;
        for &(c, i) in running {
            let left = (c - now) as u128;
            work += left;
            area += left * self.req[i] as u128;
            longest = longest.max(c);
        }
        for &i in pending {
            work += self.p[i] as u128;
            area += self.p[i] as u128 * self.req[i] as u128;
            longest = longest.max(now + self.p[i]);
        }
        let by_work = now + work.div_ceil(m) as Time;
        let by_area = now + area.div_ceil(cap) as Time;
        longest.max(by_work).max(by_area)
    }
}

/// Interval colouring: by start, each job takes the lowest machine that is
/// free at its start.
fn assign_machines<'a>(instance: &'a Instance, starts: &[Time]) -> Schedule<'a> {
    let jobs = instance.jobs();
    let mut by_start: Vec<usize> = (0..jobs.len()).collect();
    by_start.sort_by_key(|&i| (starts[i], jobs[i].id));
    let mut free: BTreeSet<usize> = (0..instance.machines()).collect();
    let mut busy: BTreeSet<(Time, usize)> = BTreeSet::new();
    let mut schedule = Schedule::new(instance);
    for i in by_start {
        while let Some(&(end, machine)) = busy.first() {
            if end > starts[i] {
                break;
            }
            busy.pop_first();
            free.insert(machine);
        }
        let machine = free
            .pop_first()
            .expect("never more than m jobs run at once");
        busy.insert((starts[i] + jobs[i].p, machine));
        schedule.push_unchecked(Assignment {
            job: jobs[i].id,
            machine,
            start: starts[i],
            completion: starts[i] + jobs[i].p,
        });
    }
    schedule
}

/// Exact `algo_makespan / opt`.
pub fn ratio(
    instance: &Instance,
    algo_makespan: Time,
    oracle: &OracleResult<'_>,
) -> Result<Ratio, OracleError> {
    if !oracle.exhausted {
        return Err(OracleError::NotExhausted { opt: oracle.opt });
    }
    if oracle.opt == 0 {
        return if instance.is_empty() {
            Ok(Ratio::from_integer(1))
        } else {
            Err(OracleError::ZeroOptimum)
        };
    }
    Ok(Ratio::new(
        to_i128(algo_makespan as u128),
        to_i128(oracle.opt as u128),
    ))
}

/// Reference optimum by brute force: every permutation of the jobs is
/// placed greedily, each job at the earliest time where it fits next to the
/// ones already placed. Machines count as a second resource of size m.
/// Factorial time; meant for n <= 6.
pub fn enumerate_makespan(instance: &Instance) -> Time {
    let jobs = instance.jobs();
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    let mut best = Time::MAX;
    permute(&mut order, 0, &mut |perm| {
        let mut placed: Vec<(Time, Time, u64)> = Vec::new();
        for &i in perm {
            let job = &jobs[i];
            let mut candidates: Vec<Time> = placed.iter().map(|&(_, c, _)| c).collect();
            candidates.push(0);
            candidates.sort_unstable();
            let start = candidates
                .into_iter()
                .find(|&t| fits(&placed, instance, t, job.p, job.req))
                .expect("after the last completion everything fits");
            placed.push((start, start + job.p, job.req));
        }
        let makespan = placed.iter().map(|&(_, c, _)| c).max().unwrap_or(0);
        best = best.min(makespan);
    });
    if jobs.is_empty() {
        0
    } else {
        best
    }
}

fn fits(placed: &[(Time, Time, u64)], instance: &Instance, t: Time, p: Time, req: u64) -> bool {
    // usage and count only change at starts, so checking t and every start
    // inside (t, t + p) covers the interval
    let mut probes = vec![t];
    probes.extend(
        placed
            .iter()
            .map(|&(s, _, _)| s)
            .filter(|&s| s > t && s < t + p),
    );
    probes.into_iter().all(|x| {
        let active = placed.iter().filter(|&&(s, c, _)| s <= x && x < c);
        let (count, usage) = active.fold((0usize, 0u64), |(n, u), &(_, _, r)| (n + 1, u + r));
        count < instance.machines() && usage + req <= instance.capacity()
    })
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Machine-free lower bound check used in tests: opt must dominate both the
/// normalised lower bound and the longest job.
pub fn dominates_bounds(instance: &Instance, opt: Time) -> bool {
    let longest = instance.jobs().iter().map(|j| j.p).max().unwrap_or(0);
    Ratio::from_integer(opt as i128) >= lower_bound(instance) && opt >= longest
}
