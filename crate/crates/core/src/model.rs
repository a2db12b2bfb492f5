//! Problem data model: jobs, instances and resource classes.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

/// Integer time in ticks.
pub type Time = u64;

/// External job identifier, unique within an instance.
pub type JobId = usize;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("resource capacity must be positive")]
    ZeroCapacity,
    #[error("job {id} has zero processing time")]
    ZeroProcessingTime { id: JobId },
    #[error("job {id} requires {req} units but capacity is {capacity}")]
    RequirementExceedsCapacity { id: JobId, req: u64, capacity: u64 },
    #[error("duplicate job id {0}")]
    DuplicateId(JobId),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rigid sequential job: runs for `p` ticks on one machine and holds
/// `req` units of the shared resource while running.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Job {
    pub id: JobId,
    pub p: Time,
    pub req: u64,
}

/// Resource class of a job relative to the capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JobClass {
    /// r <= 1/3
    Light,
    /// 1/3 < r <= 1/2
    Medium,
    /// r > 1/2
    Heavy,
}

impl fmt::Display for JobClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JobClass::Light => "light",
            JobClass::Medium => "medium",
            JobClass::Heavy => "heavy",
        };
        f.write_str(s)
    }
}

/// Classifies a job by its share of the resource using integer arithmetic only.
pub fn classify(job: &Job, capacity: u64) -> Result<JobClass, ModelError> {
    if job.req > capacity {
        return Err(ModelError::RequirementExceedsCapacity {
            id: job.id,
            req: job.req,
            capacity,
        });
    }
    Ok(class_of(job.req, capacity))
}

pub(crate) fn class_of(req: u64, capacity: u64) -> JobClass {
    let (req, capacity) = (req as u128, capacity as u128);
    if 2 * req > capacity {
        JobClass::Heavy
    } else if 3 * req > capacity {
        JobClass::Medium
    } else {
        JobClass::Light
    }
}

/// `m` identical machines, one resource of integer capacity, and a job set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    capacity: u64,
    jobs: Vec<Job>,
    index: HashMap<JobId, usize>,
}

impl Instance {
    /// Builds an instance from `(p, req)` pairs, assigning ids `0..n` in order.
    pub fn new<I>(machines: usize, capacity: u64, jobs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Time, u64)>,
    {
        let jobs = jobs
            .into_iter()
            .enumerate()
            .map(|(id, (p, req))| Job { id, p, req })
            .collect();
        Self::with_jobs(machines, capacity, jobs)
    }

    /// Builds an instance from fully specified jobs; ids must be unique.
    pub fn with_jobs(machines: usize, capacity: u64, jobs: Vec<Job>) -> Result<Self, ModelError> {
        if machines == 0 {
            return Err(ModelError::NoMachines);
        }
        if capacity == 0 {
            return Err(ModelError::ZeroCapacity);
        }
        let mut index = HashMap::with_capacity(jobs.len());
        for (pos, job) in jobs.iter().enumerate() {
            if job.p == 0 {
                return Err(ModelError::ZeroProcessingTime { id: job.id });
            }
            if job.req > capacity {
                return Err(ModelError::RequirementExceedsCapacity {
                    id: job.id,
                    req: job.req,
                    capacity,
                });
            }
            if index.insert(job.id, pos).is_some() {
                return Err(ModelError::DuplicateId(job.id));
            }
        }
        Ok(Instance {
            machines,
            capacity,
            jobs,
            index,
        })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.index.get(&id).map(|&pos| &self.jobs[pos])
    }

    /// Position of a job in [`Instance::jobs`].
    pub fn position(&self, id: JobId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn class(&self, job: &Job) -> JobClass {
        class_of(job.req, self.capacity)
    }

    /// Same jobs on a different number of machines.
    pub fn with_machines(&self, machines: usize) -> Result<Self, ModelError> {
        Self::with_jobs(machines, self.capacity, self.jobs.clone())
    }

    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// m <int> R <int>
    /// <n>
    /// <p> <req>      (n lines)
    /// ```
    ///
    /// Lines starting with `#` are skipped anywhere.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            lines.push((i + 1, trimmed.to_string()));
        }
        let mut it = lines.into_iter();

        let (line_no, header) = it.next().ok_or(ModelError::Format {
            line: 0,
            message: "missing header line".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (machines, capacity) = match fields.as_slice() {
            ["m", m, "R", r] => (
                parse_num::<usize>(m, line_no)?,
                parse_num::<u64>(r, line_no)?,
            ),
            _ => {
                return Err(ModelError::Format {
                    line: line_no,
                    message: format!("expected `m <int> R <int>`, found `{header}`"),
                })
            }
        };

        let (line_no, count) = it.next().ok_or(ModelError::Format {
            line: line_no,
            message: "missing job count".into(),
        })?;
        let n = parse_num::<usize>(&count, line_no)?;

        let mut jobs = Vec::with_capacity(n);
        for (line_no, line) in it.by_ref().take(n) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [p, req] => jobs.push((parse_num(p, line_no)?, parse_num(req, line_no)?)),
                _ => {
                    return Err(ModelError::Format {
                        line: line_no,
                        message: format!("expected `<p> <req>`, found `{line}`"),
                    })
                }
            }
        }
        if jobs.len() != n {
            return Err(ModelError::Format {
                line: line_no,
                message: format!("declared {n} jobs, found {}", jobs.len()),
            });
        }
        if let Some((line_no, _)) = it.next() {
            return Err(ModelError::Format {
                line: line_no,
                message: "trailing data after job list".into(),
            });
        }
        Self::new(machines, capacity, jobs)
    }

    /// Writes the text format read by [`Instance::read_text`]. Job ids are
    /// implied by line order, so non-dense ids are not preserved.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m {} R {}", self.machines, self.capacity)?;
        writeln!(out, "{}", self.jobs.len())?;
        for job in &self.jobs {
            writeln!(out, "{} {}", job.p, job.req)?;
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, ModelError> {
    s.parse().map_err(|_| ModelError::Format {
        line,
        message: format!("`{s}` is not a non-negative integer"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(req: u64) -> Job {
        Job { id: 0, p: 1, req }
    }

    #[test]
    fn class_boundaries() {
        assert_eq!(classify(&job(4), 12).unwrap(), JobClass::Light);
        assert_eq!(classify(&job(5), 12).unwrap(), JobClass::Medium);
        assert_eq!(classify(&job(6), 12).unwrap(), JobClass::Medium);
        assert_eq!(classify(&job(7), 12).unwrap(), JobClass::Heavy);
        assert_eq!(classify(&job(0), 12).unwrap(), JobClass::Light);
        assert_eq!(classify(&job(12), 12).unwrap(), JobClass::Heavy);
        assert!(matches!(
            classify(&job(13), 12),
            Err(ModelError::RequirementExceedsCapacity { .. })
        ));
    }

    #[test]
    fn class_partition_exhaustive() {
        for capacity in 1..40u64 {
            for req in 0..=capacity {
                let light = 3 * req <= capacity;
                let medium = 3 * req > capacity && 2 * req <= capacity;
                let heavy = 2 * req > capacity;
                assert_eq!(light as u8 + medium as u8 + heavy as u8, 1);
                let expected = if heavy {
                    JobClass::Heavy
                } else if medium {
                    JobClass::Medium
                } else {
                    JobClass::Light
                };
                assert_eq!(class_of(req, capacity), expected);
            }
        }
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(Instance::new(0, 5, vec![]), Err(ModelError::NoMachines)));
        assert!(matches!(Instance::new(1, 0, vec![]), Err(ModelError::ZeroCapacity)));
        assert!(matches!(
            Instance::new(1, 5, vec![(0, 1)]),
            Err(ModelError::ZeroProcessingTime { id: 0 })
        ));
        assert!(Instance::new(1, 5, vec![(1, 6)]).is_err());
        let dup = vec![Job { id: 3, p: 1, req: 0 }, Job { id: 3, p: 2, req: 0 }];
        assert!(matches!(Instance::with_jobs(1, 5, dup), Err(ModelError::DuplicateId(3))));
    }

    #[test]
    fn text_format() {
        let text = "# W1\nm 2 R 10\n3\n2 6\n# comment between jobs\n2 6\n2 3\n";
        let inst = Instance::read_text(text.as_bytes()).unwrap();
        assert_eq!(inst.machines(), 2);
        assert_eq!(inst.capacity(), 10);
        assert_eq!(inst.jobs()[2], Job { id: 2, p: 2, req: 3 });

        let mut out = Vec::new();
        inst.write_text(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "m 2 R 10\n3\n2 6\n2 6\n2 3\n");
    }

    #[test]
    fn text_format_errors() {
        let err = Instance::read_text("m 2 R 10\n2\n1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ModelError::Format { .. }));
        let err = Instance::read_text("m 2 R x\n0\n".as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "line 1: `x` is not a non-negative integer");
        let err = Instance::read_text("m 2 R 10\n1\n1 -1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ModelError::Format { line: 3, .. }));
    }
}
