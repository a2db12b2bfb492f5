//! Validator completeness: schedules with one injected violation are flagged
//! with the matching kind, and clean schedules respect the lower bound.

use orthosched::list::{list_schedule, OrderPolicy};
use orthosched::{lower_bound, validate, Assignment, Instance, Ratio, Schedule, ViolationKind};
use proptest::prelude::*;

fn instances() -> impl Strategy<Value = Instance> {
    (1usize..5, 2u64..20).prop_flat_map(|(m, cap)| {
        prop::collection::vec((1u64..10, 0..=cap), 2..25)
            .prop_map(move |jobs| Instance::new(m, cap, jobs).unwrap())
    })
}

fn rebuilt<'a>(inst: &'a Instance, rows: &[Assignment]) -> Schedule<'a> {
    let mut s = Schedule::new(inst);
    for &a in rows {
        s.push_unchecked(a);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn clean_schedules_respect_lower_bound(inst in instances(), seed in any::<u64>()) {
        let s = list_schedule(&inst, OrderPolicy::Rand(seed));
        prop_assert!(validate(&s).ok());
        prop_assert!(Ratio::from_integer(s.makespan() as i128) >= lower_bound(&inst));
    }

    #[test]
    fn injected_overlap_is_flagged(inst in instances(), pick in any::<prop::sample::Index>()) {
        let mut rows = list_schedule(&inst, OrderPolicy::Lpt).sorted();
        let i = pick.index(rows.len());
        let j = (i + 1) % rows.len();
        // put job j on job i's machine, starting inside job i
        let p = rows[j].completion - rows[j].start;
        rows[j].machine = rows[i].machine;
        rows[j].start = rows[i].start;
        rows[j].completion = rows[i].start + p;
        prop_assert!(validate(&rebuilt(&inst, &rows)).has(ViolationKind::MachineOverlap));
    }

    #[test]
    fn injected_overflow_is_flagged(m in 2usize..5, cap in 2u64..20, extra in 0usize..6) {
        // two jobs whose demands sum past the capacity, run side by side
        let half = cap / 2 + 1;
        let mut jobs = vec![(3, half), (3, half)];
        jobs.extend((0..extra).map(|_| (1, 0)));
        let inst = Instance::new(m, cap, jobs).unwrap();
        let mut s = Schedule::new(&inst);
        s.assign(0, 0, 0).unwrap();
        s.assign(1, 1, 1).unwrap();
        for k in 0..extra {
            s.assign(2 + k, 0, 10 + k as u64).unwrap();
        }
        let report = validate(&s);
        prop_assert!(report.has(ViolationKind::ResourceOverflow));
        prop_assert!(!report.has(ViolationKind::MachineOverlap));
        let overflow = report.violations.iter().find(|v| v.kind == ViolationKind::ResourceOverflow).unwrap();
        prop_assert_eq!(overflow.time, 1);
    }

    #[test]
    fn injected_machine_index_is_flagged(inst in instances(), pick in any::<prop::sample::Index>()) {
        let mut rows = list_schedule(&inst, OrderPolicy::Hrr).sorted();
        let i = pick.index(rows.len());
        rows[i].machine = inst.machines();
        prop_assert!(validate(&rebuilt(&inst, &rows)).has(ViolationKind::MachineCountExceeded));
    }

    #[test]
    fn injected_identity_errors_are_flagged(inst in instances(), pick in any::<prop::sample::Index>()) {
        let mut rows = list_schedule(&inst, OrderPolicy::Lrr).sorted();
        let i = pick.index(rows.len());
        let mut dup = rows[i];
        dup.start = rows.iter().map(|a| a.completion).max().unwrap() + 1;
        dup.completion = dup.start + (rows[i].completion - rows[i].start);
        rows.push(dup);
        let mut ghost = dup;
        ghost.job = inst.len() + 7;
        ghost.start += 100;
        ghost.completion += 100;
        rows.push(ghost);
        let report = validate(&rebuilt(&inst, &rows));
        prop_assert!(report.has(ViolationKind::DuplicateJob));
        prop_assert!(report.has(ViolationKind::UnknownJob));
        prop_assert!(!report.has(ViolationKind::ResourceOverflow));
    }
}
