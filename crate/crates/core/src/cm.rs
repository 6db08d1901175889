//! Configuration-model sampling and repair to a simple graph.
//!
//! [`cm_sample`] pairs adjacent entries of a shuffled half-edge sequence,
//! which yields a uniform perfect matching of half-edges and therefore a
//! multigraph with exactly the requested degrees. [`rewire_to_simple`] then
//! removes loops and parallel edges with targeted swaps under the
//! multigraph legality rule, which never creates a new defect.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::em::EmConfig;
use crate::error::{invalid, Error, Result};
use crate::graph::{Edge, EdgeList, MultiEdgeList, Node};
use crate::swap::{draw_swap, run_swaps_multigraph, RunConfig, SwapDescriptor};

/// Node `v` repeated `degrees[v]` times.
pub fn half_edges(degrees: &[u64]) -> Result<Vec<Node>> {
    let total: u64 = degrees.iter().sum();
    if total % 2 == 1 {
        return invalid(format!("degree sum {total} is odd"));
    }
    let mut out = Vec::with_capacity(total as usize);
    for (v, &d) in degrees.iter().enumerate() {
        out.extend(std::iter::repeat_n(v as Node, d as usize));
    }
    Ok(out)
}

/// Matches positions `2i` and `2i + 1` of a half-edge sequence.
pub fn match_half_edges(labels: &[Node]) -> Result<MultiEdgeList> {
    if labels.len() % 2 == 1 {
        return invalid(format!("{} half-edges cannot be matched", labels.len()));
    }
    Ok(MultiEdgeList::from_unsorted(
        labels.chunks_exact(2).map(|p| Edge::new(p[0], p[1])),
    ))
}

/// Uniform random matching of the half-edges of `degrees`.
pub fn cm_sample<R: Rng + ?Sized>(degrees: &[u64], rng: &mut R) -> Result<MultiEdgeList> {
    let mut labels = half_edges(degrees)?;
    labels.shuffle(rng);
    match_half_edges(&labels)
}

fn moments(degrees: &[u64]) -> (f64, f64, f64) {
    let n = degrees.len() as f64;
    let m1 = degrees.iter().map(|&d| d as f64).sum::<f64>() / n;
    let m2 = degrees.iter().map(|&d| (d as f64).powi(2)).sum::<f64>() / n;
    (n, m1, m2)
}

/// `(<D^2> - <D>) / (2 (<D> - 1/n))`.
pub fn expected_self_loops(degrees: &[u64]) -> f64 {
    let (n, m1, m2) = moments(degrees);
    (m2 - m1) / (2.0 * (m1 - 1.0 / n))
}

/// `(<D^2> - <D>)^2 / (2 (<D> - 1/n) (<D> - 3/n))`.
pub fn expected_multi_edges(degrees: &[u64]) -> f64 {
    let (n, m1, m2) = moments(degrees);
    0.5 * (m2 - m1).powi(2) / ((m1 - 1.0 / n) * (m1 - 3.0 / n))
}

/// Bounds on expected loops and multi-edges for degrees drawn from a
/// powerlaw with exponent 2 on `[a, b]`.
pub fn pld_defect_bounds(a: u64, b: u64) -> (f64, f64) {
    let r = (b - a + 1) as f64 / (((b + 1) as f64).ln() - (a as f64).ln());
    (0.5 * r, 0.5 * r * r)
}

/// A run of `multiplicity` equal non-loop edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGroup {
    pub edge: Edge,
    pub multiplicity: u64,
    /// Ids of all members but the first.
    pub candidates: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefectReport {
    pub self_loops: Vec<u64>,
    pub multi_groups: Vec<MultiGroup>,
}

impl DefectReport {
    pub fn is_clean(&self) -> bool {
        self.self_loops.is_empty() && self.multi_groups.is_empty()
    }

    /// Edge ids that need a repair swap.
    pub fn swap_candidates(&self) -> Vec<u64> {
        let mut ids = self.self_loops.clone();
        ids.extend(self.multi_groups.iter().flat_map(|g| g.candidates.iter().copied()));
        ids.sort_unstable();
        ids
    }

    /// Number of edges that would have to go for the graph to be simple.
    pub fn defect_count(&self) -> u64 {
        self.self_loops.len() as u64
            + self.multi_groups.iter().map(|g| g.multiplicity - 1).sum::<u64>()
    }

    /// Unordered pairs of parallel edges.
    pub fn parallel_pairs(&self) -> u64 {
        self.multi_groups
            .iter()
            .map(|g| g.multiplicity * (g.multiplicity - 1) / 2)
            .sum()
    }
}

/// Lists loops and groups of parallel edges in one scan of a sorted list.
///
/// Parallel loops are reported as loops only.
pub fn find_illegal(edges: &[Edge]) -> Result<DefectReport> {
    let mut report = DefectReport::default();
    let mut i = 0;
    while i < edges.len() {
        let e = edges[i];
        if e.u > e.v {
            return invalid(format!("edge {i} {e:?} is not canonical"));
        }
        let mut j = i + 1;
        while j < edges.len() && edges[j] == e {
            j += 1;
        }
        if j < edges.len() && edges[j] < e {
            return invalid(format!("edge list not sorted at position {j}"));
        }
        if e.is_loop() {
            report.self_loops.extend(i as u64..j as u64);
        } else if j - i > 1 {
            report.multi_groups.push(MultiGroup {
                edge: e,
                multiplicity: (j - i) as u64,
                candidates: (i as u64 + 1..j as u64).collect(),
            });
        }
        i = j;
    }
    Ok(report)
}

/// Tunables of the repair loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepairPolicy {
    pub max_rounds: u32,
    /// Double the swaps per remaining defect every round, up to
    /// `max(m, 64)` swaps per round in total.
    pub doubling: bool,
    /// Pad every round with random swaps up to this fraction of `m`.
    pub pad_fraction: f64,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        RepairPolicy {
            max_rounds: 64,
            doubling: true,
            pad_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairReport {
    pub rounds: u32,
    pub swaps: u64,
    pub initial_defects: u64,
}

/// Swaps loops and parallel edges away until the graph is simple.
pub fn rewire_to_simple<R: Rng + ?Sized>(
    edges: MultiEdgeList,
    rng: &mut R,
    policy: &RepairPolicy,
    em: &EmConfig,
) -> Result<(EdgeList, RepairReport)> {
    let mut current = edges;
    let mut report = RepairReport::default();
    let mut multiplier = 1u64;
    loop {
        let defects = find_illegal(current.as_slice())?;
        if report.rounds == 0 {
            report.initial_defects = defects.defect_count();
        }
        if defects.is_clean() {
            return Ok((current.into_simple()?, report));
        }
        let m = current.len() as u64;
        if report.rounds >= policy.max_rounds || m < 2 {
            return Err(Error::LasVegas {
                stage: "configuration-model repair",
                remaining: defects.defect_count(),
                rounds: report.rounds,
            });
        }
        let candidates = defects.swap_candidates();
        let per = multiplier.min((m.max(64) / candidates.len() as u64).max(1));
        let mut swaps: Vec<SwapDescriptor> = Vec::new();
        for id in candidates {
            for _ in 0..per {
                let b = loop {
                    let b = rng.random_range(0..m);
                    if b != id {
                        break b;
                    }
                };
                swaps.push(SwapDescriptor::new(id, b, rng.random()));
            }
        }
        let pad = (policy.pad_fraction * m as f64).ceil() as usize;
        while swaps.len() < pad {
            swaps.push(draw_swap(m, rng));
        }
        swaps.shuffle(rng);
        let cfg = RunConfig::new(swaps.len())?;
        current = run_swaps_multigraph(&current, &swaps, &cfg, em)?.0;
        report.rounds += 1;
        report.swaps += swaps.len() as u64;
        if policy.doubling {
            multiplier = multiplier.saturating_mul(2);
        }
    }
}
