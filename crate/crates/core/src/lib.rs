//! Makespan scheduling on identical parallel machines that share one
//! renewable resource.
//!
//! The crate provides the problem model and exact resource queries, a
//! 2⅚-approximation with its backfilling and heuristic variants, list
//! scheduling baselines, an exact branch-and-bound oracle for small
//! instances, and trace-driven instance generation.

pub mod approx;
pub mod bounds;
pub mod list;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod ratio;
pub mod rng;
pub mod schedule;
pub(crate) mod timeline;
pub mod validate;
pub mod workload;

pub use bounds::{lower_bound, top_m_requirement, total_requirement};
pub use model::{classify, Instance, Job, JobClass, JobId, ModelError, Time};
pub use profile::{resource_profile, ResourceProfile};
pub use ratio::{format_decimal, ratio, Ratio};
pub use schedule::{Assignment, Schedule, ScheduleError};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
