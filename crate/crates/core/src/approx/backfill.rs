use thiserror::Error;

use crate::schedule::Schedule;
use crate::timeline::Timeline;
use crate::validate::{validate, ValidationReport};

#[derive(Debug, Error)]
pub enum BackfillError {
    #[error("input schedule is infeasible: {0:?}")]
    Infeasible(ValidationReport),
    #[error("input schedule does not assign every job exactly once")]
    Incomplete,
}

/// Moves each job, in order of (start, id), to the earliest time at which it
/// fits given all other jobs. Candidate times are 0 and completion times.
/// No start ever increases; a job whose earliest slot is its current start
/// keeps its machine.
pub fn backfill<'a>(schedule: &Schedule<'a>) -> Result<Schedule<'a>, BackfillError> {
    let report = validate(schedule);
    if !report.ok() {
        return Err(BackfillError::Infeasible(report));
    }
    if !schedule.is_complete() {
        return Err(BackfillError::Incomplete);
    }
    let instance = schedule.instance();
    let mut timeline = Timeline::new(instance.machines(), instance.capacity());
    let mut current = schedule.sorted();
    for a in &current {
        let req = instance.job(a.job).expect("validated").req;
        timeline.place(a.machine, a.start, a.completion - a.start, req);
    }

    let mut order: Vec<usize> = (0..current.len()).collect();
    order.sort_by_key(|&i| (current[i].start, current[i].job));
    for i in order {
        let a = current[i];
        let p = a.completion - a.start;
        let req = instance.job(a.job).expect("validated").req;
        timeline.unplace(a.machine, a.start, p, req);
        let (start, machine) = timeline.earliest_fit(0, p, req);
        let (start, machine) = if start < a.start {
            (start, machine)
        } else {
            (a.start, a.machine)
        };
        timeline.place(machine, start, p, req);
        current[i].start = start;
        current[i].machine = machine;
        current[i].completion = start + p;
    }

    let mut out = Schedule::new(instance);
    for a in current {
        out.push_unchecked(a);
    }
    Ok(out)
}
