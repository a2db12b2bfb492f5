//! Aggregate resource queries and the makespan lower bound.

use crate::model::{Instance, Job};
use crate::ratio::{ratio, Ratio};

/// `R(J)`: summed requirement of `jobs` as a fraction of `capacity`.
pub fn total_requirement<'a, I>(jobs: I, capacity: u64) -> Ratio
where
    I: IntoIterator<Item = &'a Job>,
{
    let sum: u128 = jobs.into_iter().map(|j| j.req as u128).sum();
    ratio(sum, capacity as u128)
}

/// `R_m(J)`: summed requirement of the `m` most demanding jobs, as a fraction
/// of `capacity`.
pub fn top_m_requirement<'a, I>(jobs: I, m: usize, capacity: u64) -> Ratio
where
    I: IntoIterator<Item = &'a Job>,
{
    ratio(top_m_sum(jobs.into_iter().map(|j| j.req), m), capacity as u128)
}

/// Sum of the `m` largest values.
pub(crate) fn top_m_sum<I: IntoIterator<Item = u64>>(reqs: I, m: usize) -> u128 {
    let mut reqs: Vec<u64> = reqs.into_iter().collect();
    if reqs.len() > m {
        reqs.select_nth_unstable_by(m, |a, b| b.cmp(a));
        reqs.truncate(m);
    }
    reqs.iter().map(|&r| r as u128).sum()
}

/// `L = max(Σp / m, Σ p·req / R)`.
pub fn lower_bound(instance: &Instance) -> Ratio {
    let work: u128 = instance.jobs().iter().map(|j| j.p as u128).sum();
    let area: u128 = instance
        .jobs()
        .iter()
        .map(|j| j.p as u128 * j.req as u128)
        .sum();
    let by_machines = ratio(work, instance.machines() as u128);
    let by_resource = ratio(area, instance.capacity() as u128);
    by_machines.max(by_resource)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jobs(reqs: &[u64]) -> Vec<Job> {
        reqs.iter()
            .enumerate()
            .map(|(id, &req)| Job { id, p: 1, req })
            .collect()
    }

    #[test]
    fn totals() {
        assert_eq!(total_requirement(&jobs(&[6, 3]), 12), ratio(3, 4));
        assert_eq!(total_requirement(&jobs(&[]), 12), ratio(0, 1));
        assert_eq!(total_requirement(&jobs(&[12]), 12), ratio(1, 1));
    }

    #[test]
    fn top_m() {
        assert_eq!(top_m_requirement(&jobs(&[6, 5, 4]), 2, 12), ratio(11, 12));
        assert_eq!(top_m_requirement(&jobs(&[6, 5, 4]), 5, 12), ratio(15, 12));
        assert_eq!(top_m_requirement(&jobs(&[]), 3, 12), ratio(0, 1));
        assert_eq!(top_m_requirement(&jobs(&[1, 9, 9, 2]), 2, 12), ratio(18, 12));
    }

    #[test]
    fn lower_bounds() {
        let w1 = Instance::new(2, 10, vec![(2, 6), (2, 6), (2, 3)]).unwrap();
        assert_eq!(lower_bound(&w1), ratio(3, 1));
        let single = Instance::new(3, 10, vec![(7, 0)]).unwrap();
        assert_eq!(lower_bound(&single), ratio(7, 3));
        let empty = Instance::new(3, 10, vec![]).unwrap();
        assert_eq!(lower_bound(&empty), ratio(0, 1));
    }

    fn brute_top_m(reqs: &[u64], m: usize) -> u128 {
        // max over all subsets of size <= m
        let n = reqs.len();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize <= m)
            .map(|mask| {
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| reqs[i] as u128)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    proptest! {
        #[test]
        fn top_m_matches_subset_maximum(reqs in prop::collection::vec(0u64..20, 0..9), m in 1usize..6) {
            prop_assert_eq!(top_m_sum(reqs.iter().copied(), m), brute_top_m(&reqs, m));
        }

        #[test]
        fn top_m_monotone_and_subadditive(
            a in prop::collection::vec(0u64..30, 0..12),
            b in prop::collection::vec(0u64..30, 0..12),
            m in 1usize..6,
        ) {
            let ja = jobs(&a);
            let jb = jobs(&b);
            let both: Vec<Job> = ja.iter().chain(jb.iter()).copied().collect();
            prop_assert!(top_m_requirement(&ja, m, 30) <= top_m_requirement(&ja, m + 1, 30));
            prop_assert!(
                top_m_requirement(&both, m, 30)
                    <= top_m_requirement(&ja, m, 30) + top_m_requirement(&jb, m, 30)
            );
        }
    }
}
