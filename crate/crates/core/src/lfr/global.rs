use rand::Rng;
use serde::Serialize;

use super::realize::{realize, Randomization};
use crate::ca::CommunityAssignment;
use crate::em::EmConfig;
use crate::error::Result;
use crate::graph::{Edge, EdgeList, Node};
use crate::swap::{run_swaps, RunConfig, SwapDescriptor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GlobalReport {
    pub dropped_half_edges: u64,
    /// Configuration-model repair gave up; the Havel-Hakimi seed was used.
    pub cm_fallback: bool,
    pub rewire_rounds: u32,
    pub rewire_swaps: u64,
    /// Edges still joining co-members after the last round; removed.
    pub dropped_edges: u64,
}

pub const GLOBAL_REWIRE_ROUNDS: u32 = 64;

/// Inter-community graph on external degrees indexed by node id.
pub(crate) fn build_global_graph<R: Rng + ?Sized>(
    d_ext: &[u64],
    truth: &CommunityAssignment,
    how: &Randomization,
    rng: &mut R,
    em: &EmConfig,
) -> Result<(EdgeList, GlobalReport)> {
    let nodes: Vec<Node> = (0..d_ext.len() as Node).collect();
    let r = realize(&nodes, d_ext, how, rng, em)?;
    let mut report = GlobalReport {
        dropped_half_edges: r.dropped_half_edges,
        cm_fallback: r.cm_fallback,
        ..GlobalReport::default()
    };
    let edges = rewire_forbidden(r.edges, truth, GLOBAL_REWIRE_ROUNDS, rng, em, &mut report)?;
    Ok((edges, report))
}

/// Swaps every edge joining two co-members with a random partner until none
/// is left, scanning only edges touched in the previous round.
pub(crate) fn rewire_forbidden<R: Rng + ?Sized>(
    edges: EdgeList,
    truth: &CommunityAssignment,
    max_rounds: u32,
    rng: &mut R,
    em: &EmConfig,
    report: &mut GlobalReport,
) -> Result<EdgeList> {
    let forbidden = |e: &Edge| truth.share_community(e.u, e.v);
    let mut current = edges;
    let mut suspects: Option<Vec<Edge>> = None;
    loop {
        let ids: Vec<u64> = match &suspects {
            None => current
                .iter()
                .enumerate()
                .filter(|(_, e)| forbidden(e))
                .map(|(i, _)| i as u64)
                .collect(),
            Some(list) => list
                .iter()
                .filter(|e| forbidden(e))
                .filter_map(|e| current.as_slice().binary_search(e).ok())
                .map(|i| i as u64)
                .collect(),
        };
        if ids.is_empty() {
            return Ok(current);
        }
        let m = current.len() as u64;
        if report.rewire_rounds >= max_rounds || m < 2 {
            let keep: Vec<Edge> = current.iter().copied().filter(|e| !forbidden(e)).collect();
            report.dropped_edges += m - keep.len() as u64;
            return Ok(EdgeList::from_vec_unchecked(keep));
        }
        let swaps: Vec<SwapDescriptor> = ids
            .iter()
            .map(|&a| {
                let b = loop {
                    let b = rng.random_range(0..m);
                    if b != a {
                        break b;
                    }
                };
                SwapDescriptor::new(a, b, rng.random())
            })
            .collect();
        let before: Vec<Edge> = ids.iter().map(|&i| current.as_slice()[i as usize]).collect();
        let (next, stats) = run_swaps(&current, &swaps, &RunConfig::new(swaps.len())?, em)?;
        let mut list = stats.touched;
        list.extend(before);
        list.sort_unstable();
        list.dedup();
        suspects = Some(list);
        current = next;
        report.rewire_rounds += 1;
        report.rewire_swaps += swaps.len() as u64;
    }
}
