//! Mutable timeline used while building schedules: resource usage as an
//! ordered set of breakpoints with prefix-sum aggregates, and one interval
//! calendar per machine.

use std::collections::BTreeMap;

use crate::model::Time;

const NIL: u32 = u32::MAX;
const NEG: i128 = i128::MIN / 4;
const POS: i128 = i128::MAX / 4;

#[derive(Clone, Debug)]
struct Node {
    key: Time,
    delta: i128,
    refs: u32,
    prio: u64,
    left: u32,
    right: u32,
    sum: i128,
    // prefix extremes over the subtree, relative to the subtree's left edge
    max_pref: i128,
    min_pref: i128,
}

/// Usage step function stored as deltas at breakpoints. The usage on
/// `[key_i, key_{i+1})` is the sum of deltas at keys `<= key_i`.
#[derive(Clone, Debug)]
pub(crate) struct UsageTree {
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    seed: u64,
}

impl Default for UsageTree {
    fn default() -> Self {
        UsageTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            seed: 0x2545_F491_4F6C_DD1D,
        }
    }
}

impl UsageTree {
    fn sum(&self, n: u32) -> i128 {
        if n == NIL {
            0
        } else {
            self.nodes[n as usize].sum
        }
    }

    fn max_pref(&self, n: u32) -> i128 {
        if n == NIL {
            NEG
        } else {
            self.nodes[n as usize].max_pref
        }
    }

    fn min_pref(&self, n: u32) -> i128 {
        if n == NIL {
            POS
        } else {
            self.nodes[n as usize].min_pref
        }
    }

    fn pull(&mut self, n: u32) {
        let (l, r, delta) = {
            let node = &self.nodes[n as usize];
            (node.left, node.right, node.delta)
        };
        let ls = self.sum(l);
        let here = ls + delta;
        let max_pref = self.max_pref(l).max(here).max(here + self.max_pref(r));
        let min_pref = self.min_pref(l).min(here).min(here + self.min_pref(r));
        let sum = here + self.sum(r);
        let node = &mut self.nodes[n as usize];
        node.sum = sum;
        node.max_pref = max_pref;
        node.min_pref = min_pref;
    }

    fn next_prio(&mut self) -> u64 {
        // xorshift64*
        self.seed ^= self.seed >> 12;
        self.seed ^= self.seed << 25;
        self.seed ^= self.seed >> 27;
        self.seed.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn alloc(&mut self, key: Time, delta: i128) -> u32 {
        let prio = self.next_prio();
        let node = Node {
            key,
            delta,
            refs: 1,
            prio,
            left: NIL,
            right: NIL,
            sum: delta,
            max_pref: delta,
            min_pref: delta,
        };
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Splits into keys `< key` and keys `>= key`.
    fn split(&mut self, n: u32, key: Time) -> (u32, u32) {
        if n == NIL {
            return (NIL, NIL);
        }
        if self.nodes[n as usize].key < key {
            let (a, b) = self.split(self.nodes[n as usize].right, key);
            self.nodes[n as usize].right = a;
            self.pull(n);
            (n, b)
        } else {
            let (a, b) = self.split(self.nodes[n as usize].left, key);
            self.nodes[n as usize].left = b;
            self.pull(n);
            (a, n)
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.merge(self.nodes[a as usize].right, b);
            self.nodes[a as usize].right = r;
            self.pull(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b as usize].left);
            self.nodes[b as usize].left = l;
            self.pull(b);
            b
        }
    }

    /// Adds `delta` at `key` and adjusts its reference count by `refs`
    /// (+1 or -1). Breakpoints disappear when their last reference goes.
    fn adjust(&mut self, key: Time, delta: i128, refs: i32) {
        let (lo, rest) = self.split(self.root, key);
        let (mid, hi) = self.split(rest, key.saturating_add(1));
        let mid = if mid == NIL {
            debug_assert!(refs > 0, "removing a breakpoint that does not exist");
            self.alloc(key, delta)
        } else {
            let node = &mut self.nodes[mid as usize];
            node.delta += delta;
            node.refs = (node.refs as i32 + refs) as u32;
            if node.refs == 0 {
                debug_assert_eq!(node.delta, 0);
                self.free.push(mid);
                NIL
            } else {
                self.pull(mid);
                mid
            }
        };
        let left = self.merge(lo, mid);
        self.root = self.merge(left, hi);
    }

    pub(crate) fn add_interval(&mut self, start: Time, end: Time, amount: u64) {
        self.adjust(start, amount as i128, 1);
        self.adjust(end, -(amount as i128), 1);
    }

    pub(crate) fn remove_interval(&mut self, start: Time, end: Time, amount: u64) {
        self.adjust(start, -(amount as i128), -1);
        self.adjust(end, amount as i128, -1);
    }

    /// Usage at `t`.
    pub(crate) fn usage_at(&self, t: Time) -> i128 {
        let mut acc = 0;
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n as usize];
            if node.key <= t {
                acc += self.sum(node.left) + node.delta;
                n = node.right;
            } else {
                n = node.left;
            }
        }
        acc
    }

    /// Smallest breakpoint strictly after `t`.
    pub(crate) fn next_key_after(&self, t: Time) -> Option<Time> {
        let mut best = None;
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n as usize];
            if node.key > t {
                best = Some(node.key);
                n = node.left;
            } else {
                n = node.right;
            }
        }
        best
    }

    /// First breakpoint `k > after` whose usage satisfies `pred`. `may` must
    /// report exactly whether some usage within `[min, max]` of a subtree can
    /// satisfy `pred`.
    fn find_first<M, P>(&self, after: Time, may: &M, pred: &P) -> Option<(Time, i128)>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        self.first_bounded(self.root, 0, after, may, pred)
    }

    fn first_bounded<M, P>(
        &self,
        n: u32,
        offset: i128,
        after: Time,
        may: &M,
        pred: &P,
    ) -> Option<(Time, i128)>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        if n == NIL {
            return None;
        }
        let node = &self.nodes[n as usize];
        let here = offset + self.sum(node.left) + node.delta;
        if node.key <= after {
            return self.first_bounded(node.right, here, after, may, pred);
        }
        if let Some(hit) = self.first_bounded(node.left, offset, after, may, pred) {
            return Some(hit);
        }
        if pred(here) {
            return Some((node.key, here));
        }
        self.first_full(node.right, here, may, pred)
    }

    fn first_full<M, P>(&self, n: u32, offset: i128, may: &M, pred: &P) -> Option<(Time, i128)>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        if n == NIL || !may(offset + self.min_pref(n), offset + self.max_pref(n)) {
            return None;
        }
        let node = &self.nodes[n as usize];
        if let Some(hit) = self.first_full(node.left, offset, may, pred) {
            return Some(hit);
        }
        let here = offset + self.sum(node.left) + node.delta;
        if pred(here) {
            return Some((node.key, here));
        }
        self.first_full(node.right, here, may, pred)
    }

    /// Last breakpoint whose usage satisfies `pred`.
    fn find_last<M, P>(&self, may: &M, pred: &P) -> Option<Time>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        let mut n = self.root;
        let mut offset = 0;
        while n != NIL {
            if !may(offset + self.min_pref(n), offset + self.max_pref(n)) {
                return None;
            }
            let node = &self.nodes[n as usize];
            let here = offset + self.sum(node.left) + node.delta;
            let r = node.right;
            if r != NIL && may(here + self.min_pref(r), here + self.max_pref(r)) {
                offset = here;
                n = r;
            } else if pred(here) {
                return Some(node.key);
            } else {
                n = node.left;
            }
        }
        None
    }

    /// Earliest `t' >= t` (either `t` or a breakpoint) with usage satisfying
    /// `pred`. `None` only if no such point exists.
    pub(crate) fn first_at_or_after_where<M, P>(&self, t: Time, may: M, pred: P) -> Option<Time>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        if pred(self.usage_at(t)) {
            return Some(t);
        }
        self.find_first(t, &may, &pred).map(|(k, _)| k)
    }

    /// First time in `[a, b)` where usage exceeds `limit`.
    pub(crate) fn first_exceeding(&self, a: Time, b: Time, limit: i128) -> Option<Time> {
        if self.usage_at(a) > limit {
            return Some(a);
        }
        self.find_first(a, &|_, max| max > limit, &|v| v > limit)
            .map(|(k, _)| k)
            .filter(|&k| k < b)
    }

    /// `sup { t : pred(usage(t)) }`, i.e. the breakpoint right after the last
    /// breakpoint whose usage satisfies `pred`. `None` if no point qualifies.
    pub(crate) fn sup_where<M, P>(&self, may: M, pred: P) -> Option<Time>
    where
        M: Fn(i128, i128) -> bool,
        P: Fn(i128) -> bool,
    {
        let last = self.find_last(&may, &pred)?;
        // the final breakpoint always returns usage to zero
        Some(self.next_key_after(last).unwrap_or(last))
    }

    #[cfg(test)]
    fn breakpoints(&self) -> Vec<(Time, i128)> {
        fn walk(tree: &UsageTree, n: u32, acc: &mut i128, out: &mut Vec<(Time, i128)>) {
            if n == NIL {
                return;
            }
            let node = &tree.nodes[n as usize];
            walk(tree, node.left, acc, out);
            *acc += node.delta;
            out.push((node.key, *acc));
            walk(tree, node.right, acc, out);
        }
        let mut out = Vec::new();
        walk(self, self.root, &mut 0, &mut out);
        out
    }
}

/// Busy intervals of each machine, keyed by start time.
#[derive(Clone, Debug)]
pub(crate) struct MachineCalendar {
    busy: Vec<BTreeMap<Time, Time>>,
}

impl MachineCalendar {
    pub(crate) fn new(machines: usize) -> Self {
        MachineCalendar {
            busy: vec![BTreeMap::new(); machines],
        }
    }

    pub(crate) fn occupy(&mut self, machine: usize, start: Time, end: Time) {
        let prev = self.busy[machine].insert(start, end);
        debug_assert!(prev.is_none(), "machine {machine} double-booked at {start}");
    }

    pub(crate) fn release(&mut self, machine: usize, start: Time) {
        self.busy[machine].remove(&start);
    }

    /// `Ok(())` if `machine` is idle over `[a, b)`, otherwise the end of the
    /// earliest busy interval overlapping it.
    pub(crate) fn check(&self, machine: usize, a: Time, b: Time) -> Result<(), Time> {
        let cal = &self.busy[machine];
        if let Some((_, &end)) = cal.range(..=a).next_back() {
            if end > a {
                return Err(end);
            }
        }
        match cal.range(a..b).next() {
            Some((_, &end)) => Err(end),
            None => Ok(()),
        }
    }

    /// Lowest-index machine idle over `[a, b)`, or the earliest time any
    /// blocked machine could become usable.
    pub(crate) fn lowest_free(&self, a: Time, b: Time) -> Result<usize, Time> {
        let mut retry = Time::MAX;
        for machine in 0..self.busy.len() {
            match self.check(machine, a, b) {
                Ok(()) => return Ok(machine),
                Err(end) => retry = retry.min(end),
            }
        }
        Err(retry)
    }

}

/// Usage and machine occupancy together, with the placement queries the
/// schedulers need.
#[derive(Clone, Debug)]
pub(crate) struct Timeline {
    pub(crate) usage: UsageTree,
    pub(crate) calendar: MachineCalendar,
    capacity: u64,
}

impl Timeline {
    pub(crate) fn new(machines: usize, capacity: u64) -> Self {
        Timeline {
            usage: UsageTree::default(),
            calendar: MachineCalendar::new(machines),
            capacity,
        }
    }

    pub(crate) fn place(&mut self, machine: usize, start: Time, p: Time, req: u64) {
        self.usage.add_interval(start, start + p, req);
        self.calendar.occupy(machine, start, start + p);
    }

    pub(crate) fn unplace(&mut self, machine: usize, start: Time, p: Time, req: u64) {
        self.usage.remove_interval(start, start + p, req);
        self.calendar.release(machine, start);
    }

    /// Machine on which a job of length `p` and demand `req` can run over
    /// `[t, t + p)`, preferring the lowest index.
    pub(crate) fn fits_at(&self, t: Time, p: Time, req: u64) -> Option<usize> {
        let limit = (self.capacity - req) as i128;
        if self.usage.first_exceeding(t, t + p, limit).is_some() {
            return None;
        }
        self.calendar.lowest_free(t, t + p).ok()
    }

    /// Earliest start `>= from` at which the job fits, with its machine.
    pub(crate) fn earliest_fit(&self, from: Time, p: Time, req: u64) -> (Time, usize) {
        let limit = (self.capacity - req) as i128;
        let mut t = from;
        loop {
            if let Some(blocked) = self.usage.first_exceeding(t, t + p, limit) {
                t = self
                    .usage
                    .first_at_or_after_where(blocked, |min, _| min <= limit, |v| v <= limit)
                    .expect("usage returns to zero after the last breakpoint");
                continue;
            }
            match self.calendar.lowest_free(t, t + p) {
                Ok(machine) => return (t, machine),
                Err(next) => t = next,
            }
        }
    }

    /// Least `t' >= t` (t itself or a breakpoint) where `3 * usage < 2 * capacity`.
    pub(crate) fn first_below_two_thirds(&self, t: Time) -> Time {
        let cap = self.capacity as i128;
        self.usage
            .first_at_or_after_where(t, |min, _| 3 * min < 2 * cap, |v| 3 * v < 2 * cap)
            .expect("usage returns to zero after the last breakpoint")
    }

    /// `sup { t : 3 * usage(t) >= 2 * capacity }`, `None` for the empty set.
    pub(crate) fn sup_two_thirds(&self) -> Option<Time> {
        let cap = self.capacity as i128;
        self.usage
            .sup_where(|_, max| 3 * max >= 2 * cap, |v| 3 * v >= 2 * cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force usage over individual ticks.
    fn ticks(intervals: &[(Time, Time, u64)], horizon: Time) -> Vec<i128> {
        let mut out = vec![0i128; horizon as usize];
        for &(s, e, r) in intervals {
            for t in s..e {
                out[t as usize] += r as i128;
            }
        }
        out
    }

    #[test]
    fn add_and_remove() {
        let mut tree = UsageTree::default();
        tree.add_interval(0, 2, 6);
        tree.add_interval(1, 3, 3);
        assert_eq!(tree.breakpoints(), vec![(0, 6), (1, 9), (2, 3), (3, 0)]);
        tree.remove_interval(1, 3, 3);
        assert_eq!(tree.breakpoints(), vec![(0, 6), (2, 0)]);
        tree.add_interval(2, 4, 0);
        assert_eq!(tree.breakpoints(), vec![(0, 6), (2, 0), (4, 0)]);
        assert_eq!(tree.next_key_after(2), Some(4));
        assert_eq!(tree.next_key_after(4), None);
    }

    #[test]
    fn two_thirds_queries() {
        let mut tl = Timeline::new(2, 10);
        assert_eq!(tl.sup_two_thirds(), None);
        assert_eq!(tl.first_below_two_thirds(5), 5);
        tl.place(0, 0, 2, 6);
        tl.place(0, 2, 2, 6);
        tl.place(1, 0, 2, 3);
        assert_eq!(tl.first_below_two_thirds(0), 2);
        assert_eq!(tl.sup_two_thirds(), Some(2));
        assert_eq!(tl.fits_at(2, 2, 3), Some(1));
        assert_eq!(tl.fits_at(2, 2, 5), None);
        assert_eq!(tl.earliest_fit(0, 2, 5), (4, 0));
    }

    #[test]
    fn calendar_blocks() {
        let mut cal = MachineCalendar::new(2);
        cal.occupy(0, 2, 5);
        assert_eq!(cal.check(0, 0, 2), Ok(()));
        assert_eq!(cal.check(0, 0, 3), Err(5));
        assert_eq!(cal.check(0, 4, 6), Err(5));
        assert_eq!(cal.check(0, 5, 9), Ok(()));
        assert_eq!(cal.lowest_free(3, 4), Ok(1));
        cal.occupy(1, 0, 4);
        assert_eq!(cal.lowest_free(3, 4), Err(4));
    }

    proptest! {
        #[test]
        fn queries_match_brute_force(
            ops in prop::collection::vec((0u64..30, 1u64..8, 0u64..10, any::<bool>()), 1..40),
            probe in 0u64..40,
            len in 1u64..8,
            limit in 0i128..25,
        ) {
            let mut tree = UsageTree::default();
            let mut live: Vec<(Time, Time, u64)> = Vec::new();
            for (s, p, r, remove) in ops {
                if remove && !live.is_empty() {
                    let (s, e, r) = live.remove((s as usize) % live.len());
                    tree.remove_interval(s, e, r);
                } else {
                    tree.add_interval(s, s + p, r);
                    live.push((s, s + p, r));
                }
            }
            let horizon = 60;
            let brute = ticks(&live, horizon);
            for t in 0..horizon {
                prop_assert_eq!(tree.usage_at(t), brute[t as usize]);
            }
            // first point in [probe, probe+len) above limit
            let expect = (probe..probe + len).find(|&t| brute[t as usize] > limit);
            prop_assert_eq!(tree.first_exceeding(probe, probe + len, limit), expect);
            // first point >= probe at or below limit
            let expect = (probe..horizon).find(|&t| brute[t as usize] <= limit);
            prop_assert_eq!(
                tree.first_at_or_after_where(probe, |min, _| min <= limit, |v| v <= limit),
                expect
            );
            // sup of points above limit
            let expect = (0..horizon).rev().find(|&t| brute[t as usize] > limit).map(|t| t + 1);
            prop_assert_eq!(tree.sup_where(|_, max| max > limit, |v| v > limit), expect);
        }
    }
}
