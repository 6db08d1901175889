use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::NodePlan;
use super::realize::{realize, Randomization};
use crate::ca::{CommunityAssignment, CommunityId};
use crate::em::EmConfig;
use crate::error::Result;
use crate::graph::{Edge, EdgeList, Node};
use crate::random::Seed;
use crate::swap::{shape_legal, swapped_edges};

/// Simple graph of one community.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntraGraph {
    pub community: CommunityId,
    pub edges: EdgeList,
    pub dropped_half_edges: u64,
    pub cm_fallback: bool,
}

/// Internal degree of every membership: the parts of `plan.split[v]` go to
/// the communities of `v` in increasing id order.
pub(crate) fn membership_degrees(
    plan: &NodePlan,
    truth: &CommunityAssignment,
    communities: usize,
) -> Vec<(Vec<Node>, Vec<u64>)> {
    let mut out = vec![(Vec::new(), Vec::new()); communities];
    let m = truth.memberships();
    let mut i = 0;
    while i < m.len() {
        let v = m[i].0;
        let mut k = 0;
        while i < m.len() && m[i].0 == v {
            let (nodes, degs) = &mut out[m[i].1 as usize];
            nodes.push(v);
            degs.push(plan.split[v as usize][k]);
            i += 1;
            k += 1;
        }
    }
    out
}

/// One randomized graph per community, built in parallel from per-community
/// seeds so the result does not depend on scheduling.
pub(crate) fn build_intra_graphs(
    per_community: &[(Vec<Node>, Vec<u64>)],
    how: &Randomization,
    seed: Seed,
    em: &EmConfig,
) -> Result<Vec<IntraGraph>> {
    let em = em.share(rayon::current_num_threads() as u64);
    per_community
        .par_iter()
        .enumerate()
        .map(|(c, (nodes, degs))| {
            let mut rng = seed.rng_indexed("intra", c as u64);
            let r = realize(nodes, degs, how, &mut rng, &em)?;
            Ok(IntraGraph {
                community: c as CommunityId,
                edges: r.edges,
                dropped_half_edges: r.dropped_half_edges,
                cm_fallback: r.cm_fallback,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub rounds: u32,
    pub swaps: u64,
    pub initial_duplicates: u64,
    pub dropped_duplicates: u64,
    pub drop_budget: u64,
    /// Duplicates left at the round limit were dropped beyond the budget.
    pub budget_exceeded: bool,
}

pub const MERGE_ROUNDS: u32 = 64;
pub const STALL_ROUNDS: u32 = 3;
pub const DROP_FRACTION: f64 = 1e-3;

/// Rewires edges that occur in several communities with swaps inside one
/// community until the union is simple, then merges.
pub(crate) fn community_rewire_and_merge<R: Rng + ?Sized>(
    graphs: Vec<IntraGraph>,
    rng: &mut R,
) -> Result<(EdgeList, MergeReport)> {
    let mut comm: Vec<Vec<Edge>> = graphs.into_iter().map(|g| g.edges.into_vec()).collect();
    let total: u64 = comm.iter().map(|c| c.len() as u64).sum();
    let mut report = MergeReport {
        drop_budget: ((DROP_FRACTION * total as f64).ceil() as u64).max(1),
        ..MergeReport::default()
    };
    let mut count: HashMap<Edge, u32> = HashMap::with_capacity(total as usize);
    for e in comm.iter().flatten() {
        *count.entry(*e).or_insert(0) += 1;
    }
    let dup_total = |count: &HashMap<Edge, u32>| count.values().map(|&f| f as u64 - 1).sum::<u64>();
    let mut dups = dup_total(&count);
    report.initial_duplicates = dups;
    let mut stall = 0;
    while dups > 0 {
        let candidates = find_candidates(&comm, &count);
        if report.rounds >= MERGE_ROUNDS || stall >= STALL_ROUNDS {
            let budget = report.drop_budget - report.dropped_duplicates;
            let limit = if report.rounds >= MERGE_ROUNDS {
                report.budget_exceeded = candidates.len() as u64 > budget;
                candidates.len()
            } else {
                candidates.len().min(budget as usize)
            };
            if limit > 0 {
                drop_edges(&mut comm, &mut count, &candidates[..limit]);
                report.dropped_duplicates += limit as u64;
                dups -= limit as u64;
                stall = 0;
                continue;
            }
        }
        for &(c, i) in &candidates {
            let edges = &mut comm[c];
            let m = edges.len();
            if m < 2 {
                continue;
            }
            let j = loop {
                let j = rng.random_range(0..m);
                if j != i {
                    break j;
                }
            };
            try_swap(edges, &mut count, i, j, rng.random());
            let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
            if a != b {
                try_swap(edges, &mut count, a, b, rng.random());
            }
            report.swaps += 2;
        }
        report.rounds += 1;
        let now = dup_total(&count);
        stall = if now < dups { 0 } else { stall + 1 };
        dups = now;
    }
    let mut all: Vec<Edge> = comm.into_iter().flatten().collect();
    all.sort_unstable();
    Ok((EdgeList::from_sorted(all)?, report))
}

/// Every occurrence of a repeated edge except the first in community order.
fn find_candidates(comm: &[Vec<Edge>], count: &HashMap<Edge, u32>) -> Vec<(usize, usize)> {
    let mut seen: HashMap<Edge, ()> = HashMap::new();
    let mut out = Vec::new();
    for (c, edges) in comm.iter().enumerate() {
        for (i, e) in edges.iter().enumerate() {
            if count[e] > 1 && seen.insert(*e, ()).is_some() {
                out.push((c, i));
            }
        }
    }
    out
}

fn try_swap(edges: &mut [Edge], count: &mut HashMap<Edge, u32>, i: usize, j: usize, d: bool) -> bool {
    let (ea, eb) = (edges[i], edges[j]);
    let (t1, t2) = swapped_edges(ea, eb, d);
    let present = |e: &Edge| count.get(e).is_some_and(|&f| f > 0);
    if !shape_legal(t1, t2) || present(&t1) || present(&t2) {
        return false;
    }
    for e in [ea, eb] {
        let f = count.get_mut(&e).expect("edge is counted");
        *f -= 1;
        if *f == 0 {
            count.remove(&e);
        }
    }
    for e in [t1, t2] {
        *count.entry(e).or_insert(0) += 1;
    }
    edges[i] = t1;
    edges[j] = t2;
    true
}

fn drop_edges(comm: &mut [Vec<Edge>], count: &mut HashMap<Edge, u32>, which: &[(usize, usize)]) {
    let mut by_comm: Vec<Vec<usize>> = vec![Vec::new(); comm.len()];
    for &(c, i) in which {
        by_comm[c].push(i);
    }
    for (c, mut ids) in by_comm.into_iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        ids.sort_unstable();
        for &i in &ids {
            let e = comm[c][i];
            let f = count.get_mut(&e).expect("edge is counted");
            *f -= 1;
            if *f == 0 {
                count.remove(&e);
            }
        }
        let mut k = 0;
        comm[c].retain(|_| {
            let keep = ids.binary_search(&k).is_err();
            k += 1;
            keep
        });
    }
}
