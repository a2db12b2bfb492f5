//! Schedules: job-to-(machine, start) assignments over an instance.

use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::model::{Instance, JobId, Time};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("job {0} is not part of the instance")]
    UnknownJob(JobId),
    #[error("job {0} is assigned more than once")]
    DuplicateJob(JobId),
    #[error("machine {machine} out of range for {machines} machines")]
    MachineOutOfRange { machine: usize, machines: usize },
    #[error("row {row}: completion {completion} differs from start + p = {expected}")]
    InconsistentCompletion {
        row: usize,
        completion: Time,
        expected: Time,
    },
    #[error("schedule csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schedule csv: expected header `job_id,machine,start,completion`")]
    Header,
}

/// One job placed on a machine. The job occupies `[start, completion)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub job: JobId,
    pub machine: usize,
    pub start: Time,
    pub completion: Time,
}

impl Assignment {
    /// Whether the job runs at `t` (half-open interval).
    pub fn is_active_at(&self, t: Time) -> bool {
        self.start <= t && t < self.completion
    }
}

/// A possibly partial schedule. Feasibility is checked by
/// [`crate::validate::validate`], not on construction.
#[derive(Clone, Debug)]
pub struct Schedule<'a> {
    instance: &'a Instance,
    assignments: Vec<Assignment>,
    by_job: HashMap<JobId, usize>,
}

impl PartialEq for Schedule<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.instance, other.instance) && self.sorted() == other.sorted()
    }
}

impl<'a> Schedule<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Schedule {
            instance,
            assignments: Vec::new(),
            by_job: HashMap::new(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    /// Places a known job, deriving its completion time.
    pub fn assign(&mut self, job: JobId, machine: usize, start: Time) -> Result<(), ScheduleError> {
        let p = self
            .instance
            .job(job)
            .ok_or(ScheduleError::UnknownJob(job))?
            .p;
        if machine >= self.instance.machines() {
            return Err(ScheduleError::MachineOutOfRange {
                machine,
                machines: self.instance.machines(),
            });
        }
        if self.by_job.contains_key(&job) {
            return Err(ScheduleError::DuplicateJob(job));
        }
        self.push_unchecked(Assignment {
            job,
            machine,
            start,
            completion: start + p,
        });
        Ok(())
    }

    /// Appends an assignment without any checks. Used for schedules read from
    /// disk, which may be invalid and are meant to go through the validator.
    pub fn push_unchecked(&mut self, a: Assignment) {
        self.by_job.entry(a.job).or_insert(self.assignments.len());
        self.assignments.push(a);
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn get(&self, job: JobId) -> Option<&Assignment> {
        self.by_job.get(&job).map(|&i| &self.assignments[i])
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// True iff every instance job is assigned exactly once and nothing else is.
    pub fn is_complete(&self) -> bool {
        self.assignments.len() == self.instance.len()
            && self.by_job.len() == self.assignments.len()
            && self.by_job.keys().all(|&id| self.instance.job(id).is_some())
    }

    /// Maximum completion time, 0 when empty.
    pub fn makespan(&self) -> Time {
        self.assignments
            .iter()
            .map(|a| a.completion)
            .max()
            .unwrap_or(0)
    }

    /// Ids of jobs running at `t`, ascending.
    pub fn active_jobs(&self, t: Time) -> Vec<JobId> {
        let mut ids: Vec<JobId> = self
            .assignments
            .iter()
            .filter(|a| a.is_active_at(t))
            .map(|a| a.job)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Assignments ordered by job id (then machine and start for duplicates).
    pub fn sorted(&self) -> Vec<Assignment> {
        let mut out = self.assignments.clone();
        out.sort_by_key(|a| (a.job, a.machine, a.start, a.completion));
        out
    }

    /// Writes `job_id,machine,start,completion` rows ordered by job id.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ScheduleError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["job_id", "machine", "start", "completion"])?;
        for a in self.sorted() {
            w.write_record([
                a.job.to_string(),
                a.machine.to_string(),
                a.start.to_string(),
                a.completion.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a schedule CSV. Unknown jobs, duplicates and bad machines are
    /// kept so the validator can report them; a completion that contradicts
    /// the job's processing time is a format error.
    pub fn read_csv<R: Read>(instance: &'a Instance, input: R) -> Result<Self, ScheduleError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["job_id", "machine", "start", "completion"] {
            return Err(ScheduleError::Header);
        }
        let mut schedule = Schedule::new(instance);
        for (row, record) in r.deserialize::<(JobId, usize, Time, Time)>().enumerate() {
            let (job, machine, start, completion) = record?;
            if let Some(j) = instance.job(job) {
                let expected = start + j.p;
                if completion != expected {
                    return Err(ScheduleError::InconsistentCompletion {
                        row: row + 2,
                        completion,
                        expected,
                    });
                }
            }
            schedule.push_unchecked(Assignment {
                job,
                machine,
                start,
                completion,
            });
        }
        Ok(schedule)
    }
}
