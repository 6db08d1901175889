use std::collections::HashMap;

use super::{check_ids, shape_legal, swapped_edges, RunConfig, SwapDescriptor};
use crate::error::Result;
use crate::graph::{Edge, EdgeList, MultiEdgeList};

/// In-memory sequential swapping with a hash map of edge multiplicities.
///
/// Returns the re-sorted list and the number of executed swaps.
pub(crate) fn apply_sequential(
    mut edges: Vec<Edge>,
    swaps: &[SwapDescriptor],
    run_size: usize,
) -> (Vec<Edge>, u64) {
    let mut count: HashMap<Edge, u32> = HashMap::with_capacity(edges.len());
    for e in &edges {
        *count.entry(*e).or_insert(0) += 1;
    }
    let present = |c: &HashMap<Edge, u32>, e: &Edge| c.get(e).is_some_and(|&x| x > 0);
    let mut executed = 0;
    for run in swaps.chunks(run_size.max(1)) {
        for s in run {
            let (ea, eb) = (edges[s.a as usize], edges[s.b as usize]);
            let (t1, t2) = swapped_edges(ea, eb, s.d);
            if !shape_legal(t1, t2) || present(&count, &t1) || present(&count, &t2) {
                continue;
            }
            for e in [ea, eb] {
                *count.get_mut(&e).expect("source edge is counted") -= 1;
            }
            for e in [t1, t2] {
                *count.entry(e).or_insert(0) += 1;
            }
            edges[s.a as usize] = t1;
            edges[s.b as usize] = t2;
            executed += 1;
        }
        edges.sort_unstable();
    }
    (edges, executed)
}

/// Reference semantics for [`super::run_swaps`] on simple graphs.
pub fn sequential_swap_oracle(
    edges: &EdgeList,
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
) -> Result<EdgeList> {
    check_ids(swaps, edges.len() as u64)?;
    let (out, _) = apply_sequential(edges.as_slice().to_vec(), swaps, cfg.run_size);
    Ok(EdgeList::from_vec_unchecked(out))
}

/// Reference semantics for [`super::run_swaps_multigraph`].
pub fn sequential_swap_oracle_multigraph(
    edges: &MultiEdgeList,
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
) -> Result<MultiEdgeList> {
    check_ids(swaps, edges.len() as u64)?;
    let (out, _) = apply_sequential(edges.as_slice().to_vec(), swaps, cfg.run_size);
    MultiEdgeList::from_sorted(out)
}
