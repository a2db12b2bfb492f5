//! The approximation and baseline ratios against the exact oracle, plus the
//! oracle's own cross-check on tiny instances.

use orthosched::approx::{apalg, apalg_s, BuildState, Packing, step1_heavy, step2_light, step3_medium};
use orthosched::list::{list_schedule, OrderPolicy};
use orthosched::oracle::{enumerate_makespan, optimal_makespan, ratio, DEFAULT_BUDGET};
use orthosched::{lower_bound, resource_profile, Instance, Ratio};
use proptest::prelude::*;

fn small() -> impl Strategy<Value = Instance> {
    (2usize..5).prop_flat_map(|m| {
        prop::collection::vec((1u64..9, 0u64..=12), 1..8)
            .prop_map(move |jobs| Instance::new(m, 12, jobs).unwrap())
    })
}

/// Longest run of consecutive breakpoints with usage at least 2/3.
fn longest_dense_run(inst: &Instance, schedule: &orthosched::Schedule<'_>) -> u64 {
    let cap = inst.capacity();
    let profile = resource_profile(schedule).unwrap();
    let mut best = 0;
    let mut run_start = None;
    for &(t, usage) in profile.breakpoints() {
        let dense = 3 * usage >= 2 * cap;
        match (dense, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(a)) => {
                best = best.max(t - a);
                run_start = None;
            }
            _ => {}
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn apalg_ratio_and_t3_bound(inst in small()) {
        let opt = optimal_makespan(&inst, DEFAULT_BUDGET);
        prop_assert!(opt.exhausted);
        let m = inst.machines() as i128;
        let (s, trace) = apalg(&inst).unwrap();
        let r = ratio(&inst, s.makespan(), &opt).unwrap();
        prop_assert!(r <= Ratio::new(17, 6) - Ratio::new(1, 3 * m), "ratio {}", r);
        prop_assert!(2 * trace.t3 <= 3 * opt.opt);
        let (backfilled, _) = apalg_s(&inst).unwrap();
        prop_assert!(backfilled.makespan() >= opt.opt);
    }

    #[test]
    fn dense_stretches_are_short(inst in small()) {
        // a stretch using at least 2/3 of the resource throughout is at most
        // 3/2 OPT long, in any feasible schedule
        let opt = optimal_makespan(&inst, DEFAULT_BUDGET).opt;
        let mut state = BuildState::new(&inst, Packing::TwoThirds);
        let t1 = step1_heavy(&mut state);
        let t2 = step2_light(&mut state, t1);
        step3_medium(&mut state, t1, t2);
        let (s, _) = apalg(&inst).unwrap();
        for schedule in [state.active_schedule(), s] {
            prop_assert!(2 * longest_dense_run(&inst, &schedule) <= 3 * opt);
        }
    }

    #[test]
    fn list_policies_within_three_minus_three_over_m(inst in small(), seed in any::<u64>()) {
        let opt = optimal_makespan(&inst, DEFAULT_BUDGET);
        let m = inst.machines() as i128;
        for policy in [OrderPolicy::Lpt, OrderPolicy::Hrr, OrderPolicy::Lrr, OrderPolicy::Rand(seed)] {
            let r = ratio(&inst, list_schedule(&inst, policy).makespan(), &opt).unwrap();
            prop_assert!(r <= Ratio::from_integer(3) - Ratio::new(3, m), "{} ratio {}", policy, r);
        }
    }

    #[test]
    fn lpt_without_resource_within_graham_bound(
        m in 2usize..5,
        ps in prop::collection::vec(1u64..9, 1..8),
    ) {
        let inst = Instance::new(m, 12, ps.into_iter().map(|p| (p, 0))).unwrap();
        let opt = optimal_makespan(&inst, DEFAULT_BUDGET);
        let r = ratio(&inst, list_schedule(&inst, OrderPolicy::Lpt).makespan(), &opt).unwrap();
        prop_assert!(r <= Ratio::new(4, 3) - Ratio::new(1, 3 * m as i128));
    }

    #[test]
    fn oracle_matches_enumeration(
        m in 1usize..4,
        jobs in prop::collection::vec((1u64..6, 0u64..=12), 0..6),
    ) {
        let inst = Instance::new(m, 12, jobs).unwrap();
        let r = optimal_makespan(&inst, DEFAULT_BUDGET);
        prop_assert!(r.exhausted);
        prop_assert_eq!(r.opt, enumerate_makespan(&inst));
        prop_assert!(Ratio::from_integer(r.opt as i128) >= lower_bound(&inst));
    }
}
