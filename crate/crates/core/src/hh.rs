//! Havel-Hakimi realization of degree sequences over a run-length-compressed
//! group list.
//!
//! Nodes of equal pending degree form a group `(b, n, delta)` covering ids
//! `b..b+n`. Every iteration extracts the lowest-id node of the head group
//! (minimum degree) and connects it to the highest-degree nodes at the tail.
//! Groups that are consumed entirely are never touched individually: the
//! trailing run of such groups is marked stable and shares one global
//! counter, so an iteration costs time proportional to the number of groups
//! whose role changes, not to the number of nodes served.

use std::ops::Range;

use crate::error::{invalid, Result};
use crate::graph::{Edge, EdgeList, Node};

/// Nodes `b..b+n`, all with pending degree `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeGroup {
    pub b: Node,
    pub n: u64,
    pub delta: u64,
}

/// Run-length encoding of a non-decreasing degree sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupList {
    groups: Vec<DegreeGroup>,
}

impl GroupList {
    pub fn groups(&self) -> &[DegreeGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn node_count(&self) -> u64 {
        self.groups.iter().map(|g| g.n).sum()
    }

    /// The degree sequence this list encodes.
    pub fn expand(&self) -> Vec<u64> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.delta, g.n as usize))
            .collect()
    }
}

/// Compresses a non-decreasing sequence of positive degrees.
pub fn compact(degrees: &[u64]) -> Result<GroupList> {
    let mut groups: Vec<DegreeGroup> = Vec::new();
    for (i, &d) in degrees.iter().enumerate() {
        if d == 0 {
            return invalid(format!("degree of node {i} is zero"));
        }
        match groups.last_mut() {
            Some(g) if g.delta == d => g.n += 1,
            Some(g) if g.delta > d => {
                return invalid(format!(
                    "degree sequence decreases at node {i} ({} then {d})",
                    g.delta
                ))
            }
            _ => groups.push(DegreeGroup {
                b: i as Node,
                n: 1,
                delta: d,
            }),
        }
    }
    Ok(GroupList { groups })
}

const NIL: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Slot {
    b: Node,
    n: u64,
    // pending degree, or pending degree plus the counter if stable
    raw: u64,
    stable: bool,
    prev: usize,
    next: usize,
}

/// One Havel-Hakimi iteration: `source` connects to every node in `first`
/// and in `second` (`first` lies entirely below `second`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extraction {
    pub source: Node,
    pub first: Range<Node>,
    pub second: Range<Node>,
}

impl Extraction {
    pub fn degree(&self) -> u64 {
        (self.first.end - self.first.start) + (self.second.end - self.second.start)
    }
}

/// Streaming Havel-Hakimi generator.
///
/// Iterating yields the edges in lexicographic order. After exhaustion,
/// [`HavelHakimi::graphical`] and [`HavelHakimi::unmet`] report whether the
/// input was realized completely.
pub struct HavelHakimi {
    slots: Vec<Slot>,
    free: Vec<usize>,
    head: usize,
    tail: usize,
    // first group of the stable suffix, NIL if empty
    frontier: usize,
    stable_nodes: u64,
    remaining: u64,
    end: Node,
    counter: u64,
    live: usize,
    peak: usize,
    unmet: u64,
    pending: Option<(Node, Range<Node>, Range<Node>)>,
}

impl HavelHakimi {
    pub fn new(list: &GroupList) -> Self {
        let k = list.groups.len();
        let slots: Vec<Slot> = list
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| Slot {
                b: g.b,
                n: g.n,
                raw: g.delta,
                stable: false,
                prev: if i == 0 { NIL } else { i - 1 },
                next: if i + 1 == k { NIL } else { i + 1 },
            })
            .collect();
        let end = list.groups.last().map_or(0, |g| g.b + g.n);
        HavelHakimi {
            slots,
            free: Vec::new(),
            head: if k == 0 { NIL } else { 0 },
            tail: if k == 0 { NIL } else { k - 1 },
            frontier: NIL,
            stable_nodes: 0,
            remaining: list.node_count(),
            end,
            counter: 0,
            live: k,
            peak: k,
            unmet: 0,
            pending: None,
        }
    }

    pub fn from_degrees(degrees: &[u64]) -> Result<Self> {
        Ok(Self::new(&compact(degrees)?))
    }

    /// Half-edge demand dropped so far because it could not be served.
    pub fn unmet(&self) -> u64 {
        self.unmet
    }

    /// True while no demand has been dropped; after exhaustion, whether the
    /// input sequence is graphical.
    pub fn graphical(&self) -> bool {
        self.unmet == 0
    }

    /// Largest number of groups alive between iterations so far.
    pub fn peak_groups(&self) -> usize {
        self.peak
    }

    pub fn group_count(&self) -> usize {
        self.live
    }

    /// Number of stable groups (the suffix sharing the global counter).
    pub fn stable_groups(&self) -> usize {
        let mut k = 0;
        let mut i = self.frontier;
        while i != NIL {
            k += 1;
            i = self.slots[i].next;
        }
        k
    }

    /// Current list with effective degrees, head first.
    pub fn states(&self) -> Vec<DegreeGroup> {
        let mut out = Vec::with_capacity(self.live);
        let mut i = self.head;
        while i != NIL {
            let s = &self.slots[i];
            out.push(DegreeGroup {
                b: s.b,
                n: s.n,
                delta: self.eff(i),
            });
            i = s.next;
        }
        out
    }

    #[inline]
    fn eff(&self, i: usize) -> u64 {
        let s = &self.slots[i];
        if s.stable {
            s.raw - self.counter
        } else {
            s.raw
        }
    }

    fn alloc(&mut self, slot: Slot) -> usize {
        self.live += 1;
        match self.free.pop() {
            Some(i) => {
                self.slots[i] = slot;
                i
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        }
    }

    fn insert_after(&mut self, at: usize, mut slot: Slot) -> usize {
        let next = self.slots[at].next;
        slot.prev = at;
        slot.next = next;
        let i = self.alloc(slot);
        self.slots[at].next = i;
        if next == NIL {
            self.tail = i;
        } else {
            self.slots[next].prev = i;
        }
        i
    }

    fn unlink(&mut self, i: usize) {
        let Slot { prev, next, .. } = self.slots[i];
        if prev == NIL {
            self.head = next;
        } else {
            self.slots[prev].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.slots[next].prev = prev;
        }
        self.live -= 1;
        self.free.push(i);
    }

    /// Moves the frontier group out of the stable suffix.
    fn activate_frontier(&mut self) -> usize {
        let f = self.frontier;
        let counter = self.counter;
        let s = &mut self.slots[f];
        s.raw -= counter;
        s.stable = false;
        self.stable_nodes -= s.n;
        self.frontier = s.next;
        f
    }

    /// Extends the stable suffix by the group in front of it.
    fn stabilize(&mut self, i: usize) {
        let counter = self.counter;
        let s = &mut self.slots[i];
        s.raw += counter;
        s.stable = true;
        self.stable_nodes += s.n;
        self.frontier = i;
    }

    fn before_frontier(&self) -> usize {
        if self.frontier == NIL {
            self.tail
        } else {
            self.slots[self.frontier].prev
        }
    }

    /// Appends `src` (adjacent, equal effective degree) to `dst`.
    fn merge_into(&mut self, dst: usize, src: usize) {
        debug_assert!(!self.slots[dst].stable && !self.slots[src].stable);
        self.slots[dst].b = self.slots[dst].b.min(self.slots[src].b);
        self.slots[dst].n += self.slots[src].n;
        self.unlink(src);
    }

    /// Performs one iteration; `None` once every node has been extracted.
    pub fn step(&mut self) -> Option<Extraction> {
        if self.head == NIL {
            return None;
        }
        let h = self.head;
        if self.slots[h].stable {
            self.activate_frontier();
        }
        let source = self.slots[h].b;
        let need = self.slots[h].raw;
        self.slots[h].b += 1;
        self.slots[h].n -= 1;
        self.remaining -= 1;
        if self.slots[h].n == 0 {
            self.unlink(h);
        }

        while self.frontier != NIL && self.stable_nodes > need {
            self.activate_frontier();
        }
        loop {
            let p = self.before_frontier();
            if p == NIL || self.stable_nodes + self.slots[p].n > need {
                break;
            }
            self.stabilize(p);
        }

        let second = if self.frontier == NIL {
            self.end..self.end
        } else {
            self.slots[self.frontier].b..self.end
        };
        let p = self.before_frontier();
        let mut a = need - self.stable_nodes;
        if p == NIL {
            self.unmet += a;
            a = 0;
        }
        let first = if a > 0 {
            self.slots[p].b..self.slots[p].b + a
        } else {
            second.start..second.start
        };

        self.counter += 1;

        if a > 0 {
            // C2: the first `a` nodes of p lose one degree
            let delta = self.slots[p].raw;
            let rest = Slot {
                b: self.slots[p].b + a,
                n: self.slots[p].n - a,
                raw: delta,
                stable: false,
                prev: NIL,
                next: NIL,
            };
            let g2 = self.insert_after(p, rest);
            self.slots[p].n = a;
            self.slots[p].raw = delta - 1;
            if self.frontier != NIL && self.eff(self.frontier) == delta {
                let f = self.activate_frontier();
                self.merge_into(g2, f);
            }
            let pp = self.slots[p].prev;
            if delta == 1 {
                debug_assert_eq!(pp, NIL);
                self.remaining -= a;
                self.unlink(p);
            } else if pp != NIL && self.slots[pp].raw == delta - 1 {
                self.merge_into(pp, p);
            }
        } else if self.frontier != NIL {
            // C1 only: the whole stable suffix lost one degree
            let f = self.frontier;
            let fp = self.slots[f].prev;
            if self.eff(f) == 0 {
                debug_assert_eq!(fp, NIL);
                self.activate_frontier();
                self.remaining -= self.slots[f].n;
                self.unlink(f);
            } else if fp != NIL && self.slots[fp].raw == self.eff(f) {
                self.activate_frontier();
                self.merge_into(fp, f);
            }
        }

        self.peak = self.peak.max(self.live);
        if cfg!(debug_assertions) {
            self.check_invariants();
        }
        Some(Extraction {
            source,
            first,
            second,
        })
    }

    fn check_invariants(&self) {
        let mut i = self.head;
        let mut last: Option<(Node, u64)> = None;
        let mut stable_seen = false;
        let (mut nodes, mut stable_nodes) = (0u64, 0u64);
        while i != NIL {
            let s = &self.slots[i];
            let d = self.eff(i);
            assert!(s.n >= 1 && d >= 1, "empty or zero-degree group {s:?}");
            if let Some((end, prev_d)) = last {
                assert!(prev_d < d, "I1 violated: degrees {prev_d} then {d}");
                assert_eq!(end, s.b, "I2 violated: gap before node {}", s.b);
            }
            if i == self.frontier {
                stable_seen = true;
            }
            assert_eq!(s.stable, stable_seen, "stable groups must form the suffix");
            if s.stable {
                stable_nodes += s.n;
            }
            nodes += s.n;
            last = Some((s.b + s.n, d));
            i = s.next;
        }
        if let Some((end, _)) = last {
            assert_eq!(end, self.end);
        }
        assert_eq!(nodes, self.remaining);
        assert_eq!(stable_nodes, self.stable_nodes);
    }
}

impl Iterator for HavelHakimi {
    type Item = Edge;

    fn next(&mut self) -> Option<Edge> {
        loop {
            if let Some((u, first, second)) = &mut self.pending {
                if let Some(v) = first.next().or_else(|| second.next()) {
                    return Some(Edge { u: *u, v });
                }
            }
            let x = self.step()?;
            self.pending = Some((x.source, x.first, x.second));
        }
    }
}

/// Materialized result of a Havel-Hakimi run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HhOutput {
    pub edges: EdgeList,
    pub graphical: bool,
    pub unmet: u64,
}

/// Realizes `degrees` as a simple graph, dropping unsatisfiable demand.
pub fn hh_edges(list: &GroupList) -> HhOutput {
    let mut gen = HavelHakimi::new(list);
    let edges: Vec<Edge> = gen.by_ref().collect();
    HhOutput {
        edges: EdgeList::from_vec_unchecked(edges),
        graphical: gen.graphical(),
        unmet: gen.unmet(),
    }
}

/// Whether some simple graph has exactly these (non-decreasing) degrees.
pub fn is_graphical(degrees: &[u64]) -> Result<bool> {
    let mut gen = HavelHakimi::from_degrees(degrees)?;
    while gen.step().is_some() {}
    Ok(gen.graphical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degrees as degree_vec;
    use proptest::prelude::*;

    fn groups(v: &[(u64, u64, u64)]) -> Vec<DegreeGroup> {
        v.iter()
            .map(|&(b, n, delta)| DegreeGroup { b, n, delta })
            .collect()
    }

    fn edges(v: &[(u64, u64)]) -> Vec<Edge> {
        v.iter().map(|&(u, w)| Edge::new(u, w)).collect()
    }

    #[test]
    fn compact_examples() {
        assert_eq!(compact(&[5]).unwrap().groups(), groups(&[(0, 1, 5)]));
        assert_eq!(compact(&[2, 2, 2]).unwrap().groups(), groups(&[(0, 3, 2)]));
        let l = compact(&[1, 1, 2, 2, 3, 3]).unwrap();
        assert_eq!(l.groups(), groups(&[(0, 2, 1), (2, 2, 2), (4, 2, 3)]));
        assert_eq!(l.expand(), vec![1, 1, 2, 2, 3, 3]);
        assert!(compact(&[2, 1]).is_err());
        assert!(compact(&[0, 1]).is_err());
        assert!(compact(&[]).unwrap().is_empty());
    }

    #[test]
    fn trace_of_six_node_sequence() {
        let mut gen = HavelHakimi::from_degrees(&[1, 1, 2, 2, 3, 3]).unwrap();
        let expected = [
            groups(&[(0, 2, 1), (2, 2, 2), (4, 2, 3)]),
            groups(&[(1, 1, 1), (2, 3, 2), (5, 1, 3)]),
            groups(&[(2, 4, 2)]),
            groups(&[(3, 2, 1), (5, 1, 2)]),
            groups(&[(4, 2, 1)]),
        ];
        for state in &expected {
            assert_eq!(&gen.states(), state);
            gen.step().unwrap();
        }
        assert!(gen.step().is_none());
        let out = hh_edges(&compact(&[1, 1, 2, 2, 3, 3]).unwrap());
        assert!(out.graphical);
        assert_eq!(
            out.edges.as_slice(),
            edges(&[(0, 4), (1, 5), (2, 3), (2, 4), (3, 5), (4, 5)])
        );
    }

    #[test]
    fn small_realizations() {
        let out = hh_edges(&compact(&[2, 2, 2]).unwrap());
        assert!(out.graphical);
        assert_eq!(out.edges.as_slice(), edges(&[(0, 1), (0, 2), (1, 2)]));

        let out = hh_edges(&compact(&[1, 1, 1]).unwrap());
        assert!(!out.graphical);
        assert_eq!(out.unmet, 1);

        assert!(is_graphical(&[3, 3, 3, 3]).unwrap());
        assert!(!is_graphical(&[1, 3]).unwrap());
        assert!(is_graphical(&[]).unwrap());
    }

    #[test]
    fn stable_suffix_is_used() {
        // node 0 takes every other node; later nodes only need the tail
        let degs = [1, 1, 1, 1, 2, 2, 6];
        let mut gen = HavelHakimi::from_degrees(&degs).unwrap();
        gen.step().unwrap();
        assert!(gen.stable_groups() >= 1);
        let rest: Vec<Edge> = gen.by_ref().collect();
        assert!(gen.graphical());
        assert!(!rest.is_empty());
    }

    fn erdos_gallai(d: &[u64]) -> bool {
        let mut d: Vec<u64> = d.to_vec();
        d.sort_unstable_by(|a, b| b.cmp(a));
        if d.iter().sum::<u64>() % 2 == 1 {
            return false;
        }
        let n = d.len();
        let mut lhs = 0;
        for k in 1..=n {
            lhs += d[k - 1];
            let rhs: u64 =
                (k * (k - 1)) as u64 + d[k..].iter().map(|&x| x.min(k as u64)).sum::<u64>();
            if lhs > rhs {
                return false;
            }
        }
        true
    }

    fn check_realization(d: &[u64]) {
        let list = compact(d).unwrap();
        let mut gen = HavelHakimi::new(&list);
        let out: Vec<Edge> = gen.by_ref().collect();
        assert!(out.windows(2).all(|w| w[0] < w[1]), "not sorted for {d:?}");
        assert!(out.iter().all(|e| e.u < e.v));
        assert!(
            gen.peak_groups() <= 2 * list.len().max(1),
            "{d:?}: peak {} from {}",
            gen.peak_groups(),
            list.len()
        );
        let realized = degree_vec(&out, d.len());
        let missing: u64 = d.iter().zip(&realized).map(|(&a, &b)| a - b).sum();
        assert!(realized.iter().zip(d).all(|(r, x)| r <= x));
        assert_eq!(missing, gen.unmet(), "unmet mismatch for {d:?}");
        assert_eq!(gen.graphical(), erdos_gallai(d), "graphicality for {d:?}");
    }

    #[test]
    fn exhaustive_small_sequences() {
        fn rec(prefix: &mut Vec<u64>, n: usize) {
            if prefix.len() == n {
                check_realization(prefix);
                return;
            }
            let lo = prefix.last().copied().unwrap_or(1);
            for d in lo..=6 {
                prefix.push(d);
                rec(prefix, n);
                prefix.pop();
            }
        }
        for n in 1..=7 {
            rec(&mut Vec::new(), n);
        }
    }

    proptest! {
        #[test]
        fn random_sequences_match_erdos_gallai(mut d in prop::collection::vec(1u64..40, 1..50)) {
            d.sort_unstable();
            check_realization(&d);
        }
    }
}
