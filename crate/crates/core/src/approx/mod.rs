//! The four-step 2⅚-approximation (`ApAlg`), its backfilling extension
//! (`ApAlg-S`) and the strict-order heuristic (`ApAlg-H`).
//!
//! Jobs are split by resource share into heavy (> 1/2), medium (1/3, 1/2]
//! and light (<= 1/3). Step 1 chains the heavy jobs on machine 0. Step 2
//! packs light jobs next to them while at least 2/3 of the resource stays in
//! use. Step 3 list-schedules the medium jobs and, when step 2 consumed the
//! whole heavy prefix, packs more light jobs. Step 4 takes the jobs left
//! around the last dense point and runs LPT on them after `t3`, ignoring the
//! resource, which is safe because their `m` largest demands sum below one.

mod backfill;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use thiserror::Error;

pub use backfill::{backfill, BackfillError};

use crate::bounds::top_m_sum;
use crate::model::{Instance, JobClass, JobId, Time};
use crate::ratio::{ratio, Ratio};
use crate::schedule::{Assignment, Schedule};
use crate::timeline::Timeline;

#[derive(Debug, Error)]
pub enum ApproxError {
    /// The step-4 job set needs a full resource for its `m` largest jobs.
    /// The construction rules this out, so hitting it means a bug.
    #[error("step-4 pending set has R_m = {top_m} >= 1")]
    PendingOverCapacity { top_m: Ratio },
    #[error(transparent)]
    Backfill(#[from] BackfillError),
}

/// Which light-job packing routine steps 2 and 3 use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Packing {
    /// Stop at the first job that does not fit where usage drops below 2/3.
    TwoThirds,
    /// Place every job, in order of decreasing demand, at the earliest
    /// feasible time not before the previous job's start.
    StrictOrder,
}

/// Milestones and bookkeeping sets of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApAlgTrace {
    pub t1: Time,
    pub t2: Time,
    pub t_g: Time,
    pub t3: Time,
    pub t4: Time,
    /// Largest completion among scheduled jobs at the end of step 3.
    pub step3_max_completion: Time,
    /// Light jobs unscheduled in step 2 because they started at or after `t2`.
    pub unscheduled_step2: Vec<JobId>,
    /// Light jobs running at `t2`, ignored during step 3.
    pub ignored_step3: Vec<JobId>,
    /// Jobs running at `t_g` plus the reinstated ignored jobs.
    pub unscheduled_step4: Vec<JobId>,
    /// Everything LPT placed in step 4.
    pub pending_step4: Vec<JobId>,
}

impl ApAlgTrace {
    /// Flat `key=value` block, one key per line.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "t1={}", self.t1);
        let _ = writeln!(out, "t2={}", self.t2);
        let _ = writeln!(out, "t_g={}", self.t_g);
        let _ = writeln!(out, "t3={}", self.t3);
        let _ = writeln!(out, "t4={}", self.t4);
        let _ = writeln!(out, "step3_max_completion={}", self.step3_max_completion);
        let _ = writeln!(out, "unscheduled_step2={}", self.unscheduled_step2.len());
        let _ = writeln!(out, "ignored_step3={}", self.ignored_step3.len());
        let _ = writeln!(out, "unscheduled_step4={}", self.unscheduled_step4.len());
        let _ = writeln!(out, "pending_step4={}", self.pending_step4.len());
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Placement {
    machine: usize,
    start: Time,
}

/// Partial schedule under construction. Ignored jobs count as scheduled but
/// hold neither a machine nor resource.
#[derive(Clone, Debug)]
pub struct BuildState<'a> {
    instance: &'a Instance,
    timeline: Timeline,
    placed: Vec<Option<Placement>>,
    ignored: Vec<bool>,
    packing: Packing,
    trace: ApAlgTrace,
}

impl<'a> BuildState<'a> {
    pub fn new(instance: &'a Instance, packing: Packing) -> Self {
        BuildState {
            instance,
            timeline: Timeline::new(instance.machines(), instance.capacity()),
            placed: vec![None; instance.len()],
            ignored: vec![false; instance.len()],
            packing,
            trace: ApAlgTrace::default(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn trace(&self) -> &ApAlgTrace {
        &self.trace
    }

    pub fn is_scheduled(&self, id: JobId) -> bool {
        self.pos(id).is_some_and(|pos| self.placed[pos].is_some())
    }

    pub fn is_ignored(&self, id: JobId) -> bool {
        self.pos(id).is_some_and(|pos| self.ignored[pos])
    }

    /// Resource usage at `t`, excluding ignored jobs.
    pub fn usage_at(&self, t: Time) -> u64 {
        self.timeline.usage.usage_at(t) as u64
    }

    /// Every scheduled job, ignored ones included.
    pub fn schedule(&self) -> Schedule<'a> {
        self.collect(|_| true)
    }

    /// Scheduled jobs that occupy machines and resource.
    pub fn active_schedule(&self) -> Schedule<'a> {
        self.collect(|pos| !self.ignored[pos])
    }

    /// Ids of non-ignored jobs running at `t`.
    pub fn running_at(&self, t: Time) -> Vec<JobId> {
        self.positions_where(|pos| {
            !self.ignored[pos]
                && self.placed[pos].is_some_and(|pl| {
                    pl.start <= t && t < pl.start + self.instance.jobs()[pos].p
                })
        })
        .into_iter()
        .map(|pos| self.instance.jobs()[pos].id)
        .collect()
    }

    pub fn into_parts(self) -> (Schedule<'a>, ApAlgTrace) {
        (self.schedule(), self.trace)
    }

    fn collect(&self, keep: impl Fn(usize) -> bool) -> Schedule<'a> {
        let mut s = Schedule::new(self.instance);
        for (pos, pl) in self.placed.iter().enumerate() {
            if let Some(pl) = pl.filter(|_| keep(pos)) {
                let job = &self.instance.jobs()[pos];
                s.push_unchecked(Assignment {
                    job: job.id,
                    machine: pl.machine,
                    start: pl.start,
                    completion: pl.start + job.p,
                });
            }
        }
        s
    }

    fn pos(&self, id: JobId) -> Option<usize> {
        self.instance.position(id)
    }

    fn positions_where(&self, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.instance.len()).filter(|&pos| pred(pos)).collect()
    }

    fn class_positions(&self, class: JobClass) -> Vec<usize> {
        let jobs = self.instance.jobs();
        self.positions_where(|pos| self.instance.class(&jobs[pos]) == class)
    }

    fn place(&mut self, pos: usize, machine: usize, start: Time) {
        debug_assert!(self.placed[pos].is_none());
        let job = self.instance.jobs()[pos];
        self.timeline.place(machine, start, job.p, job.req);
        self.placed[pos] = Some(Placement { machine, start });
    }

    /// Removes a job from the schedule entirely.
    fn unschedule(&mut self, pos: usize) {
        if let Some(pl) = self.placed[pos].take() {
            if !self.ignored[pos] {
                let job = self.instance.jobs()[pos];
                self.timeline.unplace(pl.machine, pl.start, job.p, job.req);
            }
            self.ignored[pos] = false;
        }
    }

    /// Keeps the job scheduled but frees its machine and resource.
    fn ignore(&mut self, pos: usize) {
        if let Some(pl) = self.placed[pos] {
            if !self.ignored[pos] {
                let job = self.instance.jobs()[pos];
                self.timeline.unplace(pl.machine, pl.start, job.p, job.req);
                self.ignored[pos] = true;
            }
        }
    }

    fn start_of(&self, pos: usize) -> Option<Time> {
        self.placed[pos].map(|pl| pl.start)
    }

    fn completion_of(&self, pos: usize) -> Option<Time> {
        self.placed[pos].map(|pl| pl.start + self.instance.jobs()[pos].p)
    }

    fn ids(&self, positions: &[usize]) -> Vec<JobId> {
        let mut ids: Vec<JobId> = positions
            .iter()
            .map(|&pos| self.instance.jobs()[pos].id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Resolves candidate ids to unscheduled positions, sorted by decreasing
    /// demand and then ascending id.
    fn by_decreasing_req(&self, candidates: &[JobId]) -> Vec<usize> {
        let jobs = self.instance.jobs();
        let mut order: Vec<usize> = candidates
            .iter()
            .filter_map(|&id| self.pos(id))
            .filter(|&pos| self.placed[pos].is_none())
            .collect();
        order.sort_by_key(|&pos| (Reverse(jobs[pos].req), jobs[pos].id));
        order.dedup();
        order
    }

    fn pack(&mut self, candidates: &[JobId], t_s: Time) -> Time {
        match self.packing {
            Packing::TwoThirds => schedule_two_thirds(self, candidates, t_s),
            Packing::StrictOrder => schedule_strict_order(self, candidates, t_s),
        }
    }
}

/// Greedy packing behind steps 2 and 3. Jobs go in order of decreasing demand,
/// each at the first time `t_c` (never moving backwards) where usage is below
/// 2/3, and the loop stops at the first job that does not fit there. Returns
/// the least time `>= t_c` where usage is below 2/3; usage is at least 2/3 on
/// all of `[t_s, returned)`.
pub fn schedule_two_thirds(state: &mut BuildState<'_>, candidates: &[JobId], t_s: Time) -> Time {
    let order = state.by_decreasing_req(candidates);
    let mut t_c = t_s;
    for pos in order {
        t_c = state.timeline.first_below_two_thirds(t_c);
        let job = state.instance.jobs()[pos];
        match state.timeline.fits_at(t_c, job.p, job.req) {
            Some(machine) => state.place(pos, machine, t_c),
            None => break,
        }
    }
    state.timeline.first_below_two_thirds(t_c)
}

/// Replacement packing used by `ApAlg-H`: every candidate is placed, in order
/// of decreasing demand, at the earliest feasible time not before the
/// previous placement. Returns the least time `>=` the last start (or `t_s`)
/// where usage is below 2/3.
pub fn schedule_strict_order(state: &mut BuildState<'_>, candidates: &[JobId], t_s: Time) -> Time {
    let order = state.by_decreasing_req(candidates);
    let mut cursor = t_s;
    for pos in order {
        let job = state.instance.jobs()[pos];
        let (start, machine) = state.timeline.earliest_fit(cursor, job.p, job.req);
        state.place(pos, machine, start);
        cursor = start;
    }
    state.timeline.first_below_two_thirds(cursor)
}

/// Step 1: heavy jobs back to back on machine 0 from time 0, by decreasing
/// demand. Returns `t1`, their total length.
pub fn step1_heavy(state: &mut BuildState<'_>) -> Time {
    let jobs = state.instance.jobs();
    let mut heavy = state.class_positions(JobClass::Heavy);
    heavy.sort_by_key(|&pos| (Reverse(jobs[pos].req), jobs[pos].id));
    let mut t = 0;
    for pos in heavy {
        state.place(pos, 0, t);
        t += jobs[pos].p;
    }
    state.trace.t1 = t;
    t
}

/// Step 2: packs light jobs from time 0 alongside the heavy chain and returns
/// `t2 = min(t1, t_c)`. When the packing reaches `t1`, light jobs starting at
/// or after `t2` are taken back out. Skipped entirely when there is no heavy job.
pub fn step2_light(state: &mut BuildState<'_>, t1: Time) -> Time {
    let mut t2 = 0;
    if t1 > 0 {
        let lights = state.ids(&state.class_positions(JobClass::Light));
        let t_c = state.pack(&lights, 0);
        t2 = t1.min(t_c);
        if t1 == t2 {
            let late: Vec<usize> = state
                .class_positions(JobClass::Light)
                .into_iter()
                .filter(|&pos| state.start_of(pos).is_some_and(|s| s >= t2))
                .collect();
            for &pos in &late {
                state.unschedule(pos);
            }
            state.trace.unscheduled_step2 = state.ids(&late);
        }
    }
    state.trace.t2 = t2;
    t2
}

/// Step 3: ignores light jobs running at `t2`, list-schedules medium jobs by
/// increasing demand from `t2`, sets `t_g` to the supremum of the dense
/// (>= 2/3) region and, if `t1 == t2`, packs the remaining light jobs from
/// `t_g`. Returns `(t_g, t3)` with `t3 = max(t_g, t1)`.
pub fn step3_medium(state: &mut BuildState<'_>, t1: Time, t2: Time) -> (Time, Time) {
    let lights = state.class_positions(JobClass::Light);
    let running: Vec<usize> = lights
        .iter()
        .copied()
        .filter(|&pos| {
            state.start_of(pos).is_some_and(|s| s <= t2)
                && state.completion_of(pos).is_some_and(|c| t2 < c)
        })
        .collect();
    for &pos in &running {
        state.ignore(pos);
    }
    state.trace.ignored_step3 = state.ids(&running);

    let jobs = state.instance.jobs();
    let mut medium = state.class_positions(JobClass::Medium);
    medium.sort_by_key(|&pos| (jobs[pos].req, jobs[pos].id));
    let mut cursor = t2;
    for pos in medium {
        let (start, machine) = state.timeline.earliest_fit(cursor, jobs[pos].p, jobs[pos].req);
        state.place(pos, machine, start);
        cursor = start;
    }

    let mut t_g = state.timeline.sup_two_thirds().unwrap_or(t2);
    if t1 == t2 {
        let remaining: Vec<usize> = lights
            .into_iter()
            .filter(|&pos| state.placed[pos].is_none())
            .collect();
        let remaining = state.ids(&remaining);
        t_g = state.pack(&remaining, t_g);
    }
    state.trace.step3_max_completion = (0..jobs.len())
        .filter_map(|pos| state.completion_of(pos))
        .max()
        .unwrap_or(0);
    let t3 = t_g.max(t1);
    state.trace.t_g = t_g;
    state.trace.t3 = t3;
    (t_g, t3)
}

/// Step 4: unschedules ignored jobs and those running at `t_g`, then LPT over
/// them and any never-scheduled job, starting at `t3`. Fails if the `m`
/// largest pending demands reach the capacity (2/3 packing only). Returns
/// `t4 = max(t3, makespan)`.
pub fn step4_lpt(state: &mut BuildState<'_>, t_g: Time, t3: Time) -> Result<Time, ApproxError> {
    let n = state.instance.len();
    let at_tg: Vec<usize> = (0..n)
        .filter(|&pos| {
            !state.ignored[pos]
                && state.start_of(pos).is_some_and(|s| s <= t_g)
                && state.completion_of(pos).is_some_and(|c| t_g < c)
        })
        .collect();
    let mut leaving = vec![false; n];
    for &pos in &at_tg {
        leaving[pos] = true;
    }
    let ignored: Vec<usize> = (0..n).filter(|&pos| state.ignored[pos]).collect();
    let mut pending: Vec<usize> = (0..n)
        .filter(|&pos| state.ignored[pos] || state.placed[pos].is_none() || leaving[pos])
        .collect();

    let jobs = state.instance.jobs();
    let top = top_m_sum(pending.iter().map(|&pos| jobs[pos].req), state.instance.machines());
    // the bound is proven for the 2/3 packing only; ApAlg-H goes on regardless
    if state.packing == Packing::TwoThirds && top >= state.instance.capacity() as u128 {
        return Err(ApproxError::PendingOverCapacity {
            top_m: ratio(top, state.instance.capacity() as u128),
        });
    }

    let mut reinstated: Vec<usize> = ignored.iter().chain(at_tg.iter()).copied().collect();
    reinstated.sort_unstable();
    state.trace.unscheduled_step4 = state.ids(&reinstated);
    state.trace.pending_step4 = state.ids(&pending);
    for &pos in &reinstated {
        state.unschedule(pos);
    }

    // LPT order; each job takes the earliest feasible slot from t3. When every
    // kept job ends by t3 and R_m < 1 the resource never binds, so this is
    // plain LPT over machine free times.
    pending.sort_by_key(|&pos| (Reverse(jobs[pos].p), jobs[pos].id));
    let kept_end = (0..n)
        .filter_map(|pos| state.completion_of(pos))
        .max()
        .unwrap_or(0);
    if state.packing == Packing::TwoThirds && kept_end <= t3 {
        let mut free: BinaryHeap<Reverse<(Time, usize)>> =
            (0..state.instance.machines()).map(|i| Reverse((t3, i))).collect();
        for pos in pending {
            let Reverse((start, machine)) = free.pop().expect("at least one machine");
            state.place(pos, machine, start);
            free.push(Reverse((start + jobs[pos].p, machine)));
        }
    } else {
        for pos in pending {
            let (start, machine) = state.timeline.earliest_fit(t3, jobs[pos].p, jobs[pos].req);
            state.place(pos, machine, start);
        }
    }

    let makespan = (0..n)
        .filter_map(|pos| state.completion_of(pos))
        .max()
        .unwrap_or(0);
    let t4 = t3.max(makespan);
    state.trace.t4 = t4;
    Ok(t4)
}

fn run<'a>(instance: &'a Instance, packing: Packing) -> Result<(Schedule<'a>, ApAlgTrace), ApproxError> {
    let mut state = BuildState::new(instance, packing);
    let t1 = step1_heavy(&mut state);
    let t2 = step2_light(&mut state, t1);
    let (t_g, t3) = step3_medium(&mut state, t1, t2);
    step4_lpt(&mut state, t_g, t3)?;
    Ok(state.into_parts())
}

/// `ApAlg`: makespan at most `(17/6 - 1/(3m)) * OPT` in `O(n log n)`.
pub fn apalg(instance: &Instance) -> Result<(Schedule<'_>, ApAlgTrace), ApproxError> {
    run(instance, Packing::TwoThirds)
}

/// `ApAlg-S`: `ApAlg` followed by a backfilling pass.
pub fn apalg_s(instance: &Instance) -> Result<(Schedule<'_>, ApAlgTrace), ApproxError> {
    let (schedule, trace) = apalg(instance)?;
    Ok((backfill(&schedule)?, trace))
}

/// `ApAlg-H`: `ApAlg` with [`schedule_strict_order`] in place of
/// [`schedule_two_thirds`]. A heuristic; no ratio is guaranteed.
pub fn apalg_h(instance: &Instance) -> Result<(Schedule<'_>, ApAlgTrace), ApproxError> {
    run(instance, Packing::StrictOrder)
}
