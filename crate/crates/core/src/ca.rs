//! Community assignment under exact sizes and a minimum-size constraint.
//!
//! Nodes are processed in order of non-increasing constraint, i.e. the most
//! demanding node first. Node `v` may only join communities of size greater
//! than its constraint; because sizes are non-increasing these form a prefix
//! `1..=p_v`, and a community is drawn from that prefix with probability
//! proportional to its remaining free slots using a [`WeightTree`].

use std::collections::HashSet;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::Node;

pub type CommunityId = u32;

/// Community sizes in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunitySizes(Vec<u64>);

impl CommunitySizes {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return invalid(format!("community {i} has size zero"));
        }
        if let Some(i) = sizes.windows(2).position(|w| w[0] < w[1]) {
            return invalid(format!("community sizes increase at position {}", i + 1));
        }
        Ok(CommunitySizes(sizes))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Complete binary tree over leaf weights; inner nodes hold the weight of
/// their left subtree.
#[derive(Clone, Debug)]
pub struct WeightTree {
    cap: usize,
    left: Vec<u64>,
    leaves: Vec<u64>,
    total: u64,
}

impl WeightTree {
    pub fn new(weights: &[u64]) -> Self {
        let cap = weights.len().next_power_of_two().max(1);
        let mut sum = vec![0u64; 2 * cap];
        sum[cap..cap + weights.len()].copy_from_slice(weights);
        for k in (1..cap).rev() {
            sum[k] = sum[2 * k] + sum[2 * k + 1];
        }
        let mut left = vec![0u64; cap];
        for k in 1..cap {
            left[k] = sum[2 * k];
        }
        WeightTree {
            cap,
            left,
            leaves: weights.to_vec(),
            total: weights.iter().sum(),
        }
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, leaf: usize) -> u64 {
        self.leaves[leaf]
    }

    /// Total weight of leaves `0..p`.
    pub fn prefix(&self, p: usize) -> u64 {
        if p >= self.leaves.len() {
            return self.total;
        }
        let (mut node, mut size, mut rel, mut acc) = (1usize, self.cap, p, 0u64);
        while size > 1 {
            let half = size / 2;
            if rel >= half {
                acc += self.left[node];
                node = 2 * node + 1;
                rel -= half;
            } else {
                node *= 2;
            }
            size = half;
        }
        acc
    }

    /// Leaf whose cumulative weight interval contains `y < total`.
    pub fn find(&self, mut y: u64) -> usize {
        debug_assert!(y < self.total);
        let mut node = 1usize;
        while node < self.cap {
            if y < self.left[node] {
                node *= 2;
            } else {
                y -= self.left[node];
                node = 2 * node + 1;
            }
        }
        node - self.cap
    }

    pub fn decrement(&mut self, leaf: usize) {
        assert!(self.leaves[leaf] > 0, "leaf {leaf} has no weight left");
        self.leaves[leaf] -= 1;
        self.total -= 1;
        let mut node = leaf + self.cap;
        while node > 1 {
            if node.is_multiple_of(2) {
                self.left[node / 2] -= 1;
            }
            node /= 2;
        }
    }

    /// Draws a leaf proportionally to weight among the first `limit` units.
    pub fn sample<R: Rng + ?Sized>(&self, limit: u64, rng: &mut R) -> Result<usize> {
        if limit == 0 {
            return Err(Error::Validation("no feasible community has a free slot".into()));
        }
        debug_assert!(limit <= self.total);
        Ok(self.find(rng.random_range(0..limit)))
    }
}

/// Draws a community within cumulative weight `limit` and takes one slot.
pub fn tree_sample_and_decrement<R: Rng + ?Sized>(
    tree: &mut WeightTree,
    limit: u64,
    rng: &mut R,
) -> Result<usize> {
    let c = tree.sample(limit, rng)?;
    tree.decrement(c);
    Ok(c)
}

/// For every node the number `p_v` of communities it may join and their
/// total size `W_v`.
pub fn compute_pv(sizes: &CommunitySizes, constraints: &[u64]) -> Result<(Vec<usize>, Vec<u64>)> {
    if let Some(i) = constraints.windows(2).position(|w| w[0] < w[1]) {
        return invalid(format!("constraints must be non-increasing (position {})", i + 1));
    }
    let s = sizes.as_slice();
    let mut p = Vec::with_capacity(constraints.len());
    let mut w = Vec::with_capacity(constraints.len());
    // constraints only decrease, so the feasible prefix only grows
    let (mut k, mut acc) = (0usize, 0u64);
    for (v, &d) in constraints.iter().enumerate() {
        while k < s.len() && s[k] > d {
            acc += s[k];
            k += 1;
        }
        if k == 0 {
            return invalid(format!(
                "node {v} needs a community larger than {d}, the largest has {}",
                s.first().copied().unwrap_or(0)
            ));
        }
        p.push(k);
        w.push(acc);
    }
    Ok((p, w))
}

/// Sorted `(node, community)` memberships.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommunityAssignment {
    memberships: Vec<(Node, CommunityId)>,
}

impl CommunityAssignment {
    pub fn from_pairs(mut pairs: Vec<(Node, CommunityId)>) -> Self {
        pairs.sort_unstable();
        CommunityAssignment { memberships: pairs }
    }

    pub fn memberships(&self) -> &[(Node, CommunityId)] {
        &self.memberships
    }

    pub fn len(&self) -> usize {
        self.memberships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    /// Communities of `v` in increasing order.
    pub fn communities_of(&self, v: Node) -> &[(Node, CommunityId)] {
        let lo = self.memberships.partition_point(|m| m.0 < v);
        let hi = self.memberships.partition_point(|m| m.0 <= v);
        &self.memberships[lo..hi]
    }

    /// Whether `u` and `v` have a community in common.
    pub fn share_community(&self, u: Node, v: Node) -> bool {
        let (a, b) = (self.communities_of(u), self.communities_of(v));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].1.cmp(&b[j].1) {
                std::cmp::Ordering::Equal => return true,
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        false
    }

    pub fn community_sizes(&self, communities: usize) -> Vec<u64> {
        let mut s = vec![0u64; communities];
        for &(_, c) in &self.memberships {
            s[c as usize] += 1;
        }
        s
    }

    /// Members of every community, each list sorted.
    pub fn members(&self, communities: usize) -> Vec<Vec<Node>> {
        let mut out = vec![Vec::new(); communities];
        for &(v, c) in &self.memberships {
            out[c as usize].push(v);
        }
        out
    }

    pub fn duplicate_count(&self) -> usize {
        self.memberships.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// Checks exact sizes, `size > constraint` for every membership and the
    /// absence of duplicate memberships. `constraint(v, c)` is the internal
    /// degree node `v` needs in community `c`.
    pub fn verify(&self, sizes: &[u64], constraint: impl Fn(Node, CommunityId) -> u64) -> Result<()> {
        if let Some(w) = self.memberships.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("node {} joins community {} twice", w[0].0, w[0].1));
        }
        if let Some(&(v, c)) = self.memberships.iter().find(|m| m.1 as usize >= sizes.len()) {
            return invalid(format!("node {v} joins unknown community {c}"));
        }
        let got = self.community_sizes(sizes.len());
        if let Some(c) = (0..sizes.len()).find(|&c| got[c] != sizes[c]) {
            return invalid(format!(
                "community {c} has {} members instead of {}",
                got[c], sizes[c]
            ));
        }
        for &(v, c) in &self.memberships {
            let need = constraint(v, c);
            if sizes[c as usize] <= need {
                return invalid(format!(
                    "node {v} needs {need} neighbours but community {c} has size {}",
                    sizes[c as usize]
                ));
            }
        }
        Ok(())
    }
}

/// Tunables for overlapping assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssignPolicy {
    /// Resamples per membership before an already held community is traded.
    pub resample_attempts: u32,
    /// Pool size is `min(T, factor * C * max nu)`.
    pub endgame_factor: u64,
    /// Swap attempts per stuck membership.
    pub swap_attempts: u32,
}

impl Default for AssignPolicy {
    fn default() -> Self {
        AssignPolicy {
            resample_attempts: 50,
            endgame_factor: 4,
            swap_attempts: 10_000,
        }
    }
}

/// Assigns node `i` (in processing order) to `nu[i]` distinct communities.
pub fn assign<R: Rng + ?Sized>(
    sizes: &CommunitySizes,
    constraints: &[u64],
    nu: &[u32],
    rng: &mut R,
) -> Result<CommunityAssignment> {
    assign_with(sizes, constraints, nu, &AssignPolicy::default(), rng)
}

pub fn assign_with<R: Rng + ?Sized>(
    sizes: &CommunitySizes,
    constraints: &[u64],
    nu: &[u32],
    policy: &AssignPolicy,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    if constraints.len() != nu.len() {
        return invalid("constraints and memberships differ in length");
    }
    let total: u64 = nu.iter().map(|&x| x as u64).sum();
    if total != sizes.total() {
        return invalid(format!(
            "{total} memberships requested but communities offer {} slots",
            sizes.total()
        ));
    }
    let (p, _) = compute_pv(sizes, constraints)?;
    check_feasible(sizes, &p, nu)?;

    let s = sizes.as_slice();
    let mut tree = WeightTree::new(s);
    let max_nu = nu.iter().copied().max().unwrap_or(1) as u64;
    let pool = total.min(policy.endgame_factor * s.len() as u64 * max_nu).max(1) as usize;
    let mut out: Vec<(Node, CommunityId)> = Vec::with_capacity(total as usize);
    let mut held: Vec<CommunityId> = Vec::new();

    for (v, (&pv, &k)) in p.iter().zip(nu).enumerate() {
        let v = v as Node;
        let first = out.len();
        held.clear();
        for _ in 0..k {
            let limit = tree.prefix(pv);
            let mut pick = None;
            for _ in 0..policy.resample_attempts.max(1) {
                let c = tree.sample(limit, rng)? as CommunityId;
                if !held.contains(&c) {
                    pick = Some(c);
                    break;
                }
            }
            let c = match pick {
                Some(c) => {
                    tree.decrement(c as usize);
                    c
                }
                None => trade(&mut tree, &mut out, first, pv, &held, &p, pool, policy, rng)?,
            };
            held.push(c);
            out.push((v, c));
        }
    }
    Ok(CommunityAssignment::from_pairs(out))
}

/// Like [`assign`] for nodes in any order: nodes are processed by
/// non-increasing constraint and the result is keyed by the input index.
pub fn assign_any_order<R: Rng + ?Sized>(
    sizes: &CommunitySizes,
    constraints: &[u64],
    nu: &[u32],
    rng: &mut R,
) -> Result<CommunityAssignment> {
    if constraints.len() != nu.len() {
        return invalid("constraints and memberships differ in length");
    }
    let mut order: Vec<usize> = (0..constraints.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(constraints[v]), v));
    let sorted: Vec<u64> = order.iter().map(|&v| constraints[v]).collect();
    let sorted_nu: Vec<u32> = order.iter().map(|&v| nu[v]).collect();
    let by_position = assign(sizes, &sorted, &sorted_nu, rng)?;
    let pairs = by_position
        .memberships()
        .iter()
        .map(|&(p, c)| (order[p as usize] as Node, c))
        .collect();
    Ok(CommunityAssignment::from_pairs(pairs))
}

/// Hall condition for the nested feasibility prefixes.
fn check_feasible(sizes: &CommunitySizes, p: &[usize], nu: &[u32]) -> Result<()> {
    let s = sizes.as_slice();
    let mut demand = vec![0u64; s.len() + 1];
    for (v, (&pv, &k)) in p.iter().zip(nu).enumerate() {
        if k as usize > pv {
            return invalid(format!(
                "node {v} needs {k} distinct communities but only {pv} are large enough"
            ));
        }
        demand[pv] += k as u64;
    }
    let (mut need, mut supply) = (0u64, 0u64);
    for k in 1..=s.len() {
        need += demand[k];
        supply += s[k - 1];
        if need > supply {
            return invalid(format!(
                "{need} memberships only fit the {k} largest communities, which hold {supply}"
            ));
        }
    }
    Ok(())
}

/// Frees a slot for `v` by moving an earlier membership: some `(u, c2)`
/// with `c2` feasible and new for `v` moves `u` into a community `c` that
/// still has a free slot (but which `v` already holds), and `v` takes `c2`.
/// Random candidates come from the last `pool` memberships; if none fits,
/// all earlier memberships are scanned once.
#[allow(clippy::too_many_arguments)]
fn trade<R: Rng + ?Sized>(
    tree: &mut WeightTree,
    out: &mut [(Node, CommunityId)],
    first_of_v: usize,
    pv: usize,
    held: &[CommunityId],
    p: &[usize],
    pool: usize,
    policy: &AssignPolicy,
    rng: &mut R,
) -> Result<CommunityId> {
    let free: Vec<CommunityId> = held
        .iter()
        .copied()
        .filter(|&c| tree.weight(c as usize) > 0)
        .collect();
    let fits = |out: &[(Node, CommunityId)], j: usize, c: CommunityId| {
        let (u, c2) = out[j];
        if c2 as usize >= pv || held.contains(&c2) || c as usize >= p[u as usize] {
            return false;
        }
        // memberships of one node are contiguous in processing order
        let start = out[..j].iter().rposition(|m| m.0 != u).map_or(0, |k| k + 1);
        !out[start..first_of_v].iter().take_while(|m| m.0 == u).any(|m| m.1 == c)
    };
    let mut found = None;
    if !free.is_empty() {
        let lo = first_of_v.saturating_sub(pool);
        if lo < first_of_v {
            for _ in 0..policy.swap_attempts {
                let c = free[rng.random_range(0..free.len())];
                let j = rng.random_range(lo..first_of_v);
                if fits(out, j, c) {
                    found = Some((j, c));
                    break;
                }
            }
        }
        if found.is_none() && first_of_v > 0 {
            let offset = rng.random_range(0..first_of_v);
            found = (0..first_of_v)
                .map(|k| (k + offset) % first_of_v)
                .find_map(|j| free.iter().find(|&&c| fits(out, j, c)).map(|&c| (j, c)));
        }
    }
    let Some((j, c)) = found else {
        return Err(Error::LasVegas {
            stage: "community assignment",
            remaining: 1,
            rounds: policy.swap_attempts,
        });
    };
    let c2 = out[j].1;
    out[j].1 = c;
    tree.decrement(c as usize);
    Ok(c2)
}

/// Removes duplicate memberships by exchanging communities with random
/// other memberships; sizes and constraints are preserved.
pub fn repair_duplicate_memberships<R: Rng + ?Sized>(
    assignment: CommunityAssignment,
    sizes: &[u64],
    constraint: impl Fn(Node) -> u64,
    max_attempts: u32,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    let mut m = assignment.memberships;
    let mut set: HashSet<(Node, CommunityId)> = HashSet::with_capacity(m.len());
    let mut dups = Vec::new();
    for (i, &x) in m.iter().enumerate() {
        if !set.insert(x) {
            dups.push(i);
        }
    }
    let fits = |v: Node, c: CommunityId| sizes[c as usize] > constraint(v);
    for (done, &i) in dups.iter().enumerate() {
        let (v, c) = m[i];
        let mut fixed = false;
        for _ in 0..max_attempts {
            let j = rng.random_range(0..m.len());
            let (u, c2) = m[j];
            if u == v || c2 == c || set.contains(&(v, c2)) || set.contains(&(u, c)) {
                continue;
            }
            if !fits(v, c2) || !fits(u, c) {
                continue;
            }
            set.remove(&(u, c2));
            set.insert((v, c2));
            set.insert((u, c));
            m[i] = (v, c2);
            m[j] = (u, c);
            fixed = true;
            break;
        }
        if !fixed {
            return Err(Error::LasVegas {
                stage: "duplicate membership repair",
                remaining: (dups.len() - done) as u64,
                rounds: max_attempts,
            });
        }
    }
    Ok(CommunityAssignment::from_pairs(m))
}
