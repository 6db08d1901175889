use rand::Rng;

use super::LfrParams;
use crate::ca::CommunitySizes;
use crate::error::{invalid, Result};
use crate::random::{even_split, randomized_round, sample_monotonic_pld, Pld, PldParams, Seed};

/// Per-node degrees and their split into external and internal parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePlan {
    /// Non-decreasing in the node id.
    pub degrees: Vec<u64>,
    pub nu: Vec<u32>,
    pub d_ext: Vec<u64>,
    pub d_in: Vec<u64>,
    /// Internal degree per membership; `split[v].len() == nu[v]`.
    pub split: Vec<Vec<u64>>,
}

impl NodePlan {
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn total_memberships(&self) -> u64 {
        self.nu.iter().map(|&k| k as u64).sum()
    }

    /// Largest internal degree node `v` needs in any one community.
    pub fn constraint(&self, v: usize) -> u64 {
        self.d_in[v].div_ceil(self.nu[v] as u64)
    }
}

pub fn sample_node_plan(params: &LfrParams, seed: Seed) -> Result<NodePlan> {
    params.validate()?;
    let n = params.n;
    let dist = PldParams::new(params.dmin, params.dmax, params.gamma)?;
    let degrees = sample_monotonic_pld(n, dist, seed.rng("degrees"))?;

    let mut nu = vec![1u32; n as usize];
    let mut rng = seed.rng("overlap");
    for v in rand::seq::index::sample(&mut rng, n as usize, params.overlap as usize) {
        nu[v] = params.nu;
    }

    let mut rng = seed.rng("mixing");
    let d_ext: Vec<u64> = degrees
        .iter()
        .map(|&d| randomized_round(params.mu * d as f64, &mut rng).min(d))
        .collect();
    let d_in: Vec<u64> = degrees.iter().zip(&d_ext).map(|(d, e)| d - e).collect();
    let mut rng = seed.rng("split");
    let split = d_in
        .iter()
        .zip(&nu)
        .map(|(&d, &k)| even_split(d, k as usize, &mut rng))
        .collect();
    Ok(NodePlan {
        degrees,
        nu,
        d_ext,
        d_in,
        split,
    })
}

/// Community sizes from `Pld[smin, smax)` summing to exactly `total`.
pub fn sample_community_sizes(params: &LfrParams, total: u64, seed: Seed) -> Result<CommunitySizes> {
    if total < params.smin {
        return invalid(format!(
            "{total} memberships cannot fill a community of minimum size {}",
            params.smin
        ));
    }
    let dist = Pld::new(PldParams::new(params.smin, params.smax, params.beta)?)?;
    let mut rng = seed.rng("sizes");
    let mut sizes = draw_sizes(&dist, total, &mut rng);
    for _ in 0..RESAMPLE_ATTEMPTS {
        if let Some(fit) = shrink_to(&sizes, total, params.smin) {
            return finish(fit);
        }
        sizes.pop();
        let mut sum: u64 = sizes.iter().sum();
        while sum < total {
            let s = dist.sample(&mut rng);
            sizes.push(s);
            sum += s;
        }
    }
    sizes.pop();
    match grow_to(&sizes, total, params.smax) {
        Some(fit) => finish(fit),
        None => invalid(format!(
            "no community sizes in [{}, {}] sum to {total}",
            params.smin, params.smax
        )),
    }
}

const RESAMPLE_ATTEMPTS: u32 = 1000;

fn finish(mut sizes: Vec<u64>) -> Result<CommunitySizes> {
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    CommunitySizes::new(sizes)
}

/// Draws until the sum reaches `total`.
pub(crate) fn draw_sizes<R: Rng + ?Sized>(dist: &Pld, total: u64, rng: &mut R) -> Vec<u64> {
    let mut sizes = Vec::new();
    let mut sum = 0;
    while sum < total {
        let s = dist.sample(rng);
        sizes.push(s);
        sum += s;
    }
    sizes
}

/// Removes the overshoot from the largest community, or one unit at a time
/// round-robin over communities above `smin`.
pub(crate) fn shrink_to(sizes: &[u64], total: u64, smin: u64) -> Option<Vec<u64>> {
    let sum: u64 = sizes.iter().sum();
    let mut over = sum.checked_sub(total)?;
    let mut out = sizes.to_vec();
    if over == 0 {
        return Some(out);
    }
    let (big, &largest) = out.iter().enumerate().max_by_key(|&(i, s)| (*s, std::cmp::Reverse(i)))?;
    if largest >= smin + over {
        out[big] -= over;
        return Some(out);
    }
    let slack: u64 = out.iter().map(|&s| s.saturating_sub(smin)).sum();
    if slack < over {
        return None;
    }
    while over > 0 {
        for s in out.iter_mut() {
            if over > 0 && *s > smin {
                *s -= 1;
                over -= 1;
            }
        }
    }
    Some(out)
}

/// Adds the deficit one unit at a time round-robin up to `smax`.
pub(crate) fn grow_to(sizes: &[u64], total: u64, smax: u64) -> Option<Vec<u64>> {
    let sum: u64 = sizes.iter().sum();
    let mut deficit = total.checked_sub(sum)?;
    let room: u64 = sizes.iter().map(|&s| smax.saturating_sub(s)).sum();
    if room < deficit {
        return None;
    }
    let mut out = sizes.to_vec();
    while deficit > 0 {
        for s in out.iter_mut() {
            if deficit > 0 && *s < smax {
                *s += 1;
                deficit -= 1;
            }
        }
    }
    Some(out)
}
