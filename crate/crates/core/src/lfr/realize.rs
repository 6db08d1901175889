use rand::Rng;

use super::Sampler;
use crate::cm::{cm_sample, rewire_to_simple, RepairPolicy};
use crate::em::EmConfig;
use crate::error::{Error, Result};
use crate::graph::{degrees, Edge, EdgeList, Node};
use crate::hh::{compact, hh_edges};
use crate::swap::{draw_random_swaps, apply_sequential, run_swaps, RunConfig};

/// Node count below which swaps run in memory.
pub const IN_MEMORY_NODES: usize = 10_000;

/// Swap totals are drawn and processed this many runs at a time.
const RUNS_PER_BATCH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Randomization {
    pub sampler: Sampler,
    pub swaps_factor: f64,
    pub cm_swaps_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Realized {
    pub edges: EdgeList,
    pub dropped_half_edges: u64,
    /// Configuration-model repair gave up and the Havel-Hakimi seed was used.
    pub cm_fallback: bool,
}

/// Simple random graph on `nodes` (distinct ids) with the paired degrees,
/// up to residual demand Havel-Hakimi cannot place.
pub(crate) fn realize<R: Rng + ?Sized>(
    nodes: &[Node],
    degs: &[u64],
    how: &Randomization,
    rng: &mut R,
    em: &EmConfig,
) -> Result<Realized> {
    debug_assert_eq!(nodes.len(), degs.len());
    let mut order: Vec<usize> = (0..nodes.len()).filter(|&i| degs[i] > 0).collect();
    order.sort_by_key(|&i| (degs[i], nodes[i]));
    let local: Vec<u64> = order.iter().map(|&i| degs[i]).collect();
    let hh = hh_edges(&compact(&local)?);
    let k = local.len();
    let use_memory = nodes.len() < IN_MEMORY_NODES;

    let repaired = match how.sampler {
        Sampler::Hh => None,
        Sampler::Cm => {
            let realized = degrees(hh.edges.as_slice(), k);
            let multi = cm_sample(&realized, rng)?;
            match rewire_to_simple(multi, rng, &RepairPolicy::default(), em) {
                Ok((simple, _)) => Some(simple),
                // dense parts can leave a few defects no swap removes
                Err(Error::LasVegas { .. }) => None,
                Err(e) => return Err(e),
            }
        }
    };
    let cm_fallback = how.sampler == Sampler::Cm && repaired.is_none();
    let local_edges = match repaired {
        Some(simple) => {
            let count = (how.cm_swaps_factor * simple.len() as f64).round() as u64;
            randomize(simple, count, use_memory, rng, em)?
        }
        None => {
            let count = (how.swaps_factor * hh.edges.len() as f64).round() as u64;
            randomize(hh.edges, count, use_memory, rng, em)?
        }
    };
    let mapped = local_edges
        .iter()
        .map(|e| Edge::new(nodes[order[e.u as usize]], nodes[order[e.v as usize]]));
    Ok(Realized {
        edges: EdgeList::from_unsorted(mapped)?,
        dropped_half_edges: hh.unmet,
        cm_fallback,
    })
}

/// Applies `count` uniform random swaps with the default run size.
pub fn randomize<R: Rng + ?Sized>(
    edges: EdgeList,
    count: u64,
    in_memory: bool,
    rng: &mut R,
    em: &EmConfig,
) -> Result<EdgeList> {
    let m = edges.len();
    if m < 2 || count == 0 {
        return Ok(edges);
    }
    let cfg = RunConfig::default_for(m);
    let batch = (cfg.run_size * RUNS_PER_BATCH) as u64;
    let mut current = edges;
    let mut left = count;
    while left > 0 {
        let k = left.min(batch);
        let swaps = draw_random_swaps(m as u64, k as usize, rng)?;
        current = if in_memory {
            let (out, _) = apply_sequential(current.into_vec(), &swaps, cfg.run_size);
            EdgeList::from_vec_unchecked(out)
        } else {
            run_swaps(&current, &swaps, &cfg, em)?.0
        };
        left -= k;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Seed;

    fn how(sampler: Sampler) -> Randomization {
        Randomization {
            sampler,
            swaps_factor: 10.0,
            cm_swaps_factor: 5.0,
        }
    }

    #[test]
    fn triangle_is_unique() {
        for s in [Sampler::Hh, Sampler::Cm] {
            let r = realize(&[4, 9, 7], &[2, 2, 2], &how(s), &mut Seed(1).rng("t"), &EmConfig::default()).unwrap();
            let want = EdgeList::from_unsorted([Edge::new(4, 7), Edge::new(4, 9), Edge::new(7, 9)]).unwrap();
            assert_eq!(r.edges, want);
            assert_eq!(r.dropped_half_edges, 0);
        }
    }

    #[test]
    fn odd_sum_drops_one_half_edge() {
        let r = realize(&[0, 1, 2, 3], &[1, 1, 1, 0], &how(Sampler::Hh), &mut Seed(1).rng("t"), &EmConfig::default()).unwrap();
        assert_eq!(r.edges.len(), 1);
        assert_eq!(r.dropped_half_edges, 1);
    }

    #[test]
    fn degrees_preserved_both_engines() {
        let n = 300usize;
        let nodes: Vec<Node> = (0..n as u64).map(|v| v * 3 + 1).collect();
        let degs: Vec<u64> = (0..n as u64).map(|v| 1 + v % 6).collect();
        let bound = 3 * n + 1;
        let mut want = vec![0u64; bound];
        for (&v, &d) in nodes.iter().zip(&degs) {
            want[v as usize] = d;
        }
        for s in [Sampler::Hh, Sampler::Cm] {
            let r = realize(&nodes, &degs, &how(s), &mut Seed(2).rng("t"), &EmConfig::default()).unwrap();
            assert_eq!(r.dropped_half_edges, 0);
            assert!(degrees(r.edges.as_slice(), bound) == want);
        }
        let e = realize(&nodes, &degs, &how(Sampler::Hh), &mut Seed(2).rng("t"), &EmConfig::default()).unwrap().edges;
        let mem = randomize(e.clone(), 5000, true, &mut Seed(3).rng("r"), &EmConfig::default()).unwrap();
        let ext = randomize(e, 5000, false, &mut Seed(3).rng("r"), &EmConfig::default()).unwrap();
        assert_eq!(mem, ext);
    }
}
