//! The LFR benchmark pipeline.
//!
//! Degrees, memberships and community sizes are sampled first. External
//! degrees become an inter-community graph that is rewired until no edge
//! joins two co-members, internal degrees become one graph per community,
//! edges repeated across overlapping communities are rewired away, and the
//! union is the benchmark graph. Node ids are `0..n` with degrees
//! non-decreasing in the id.

mod global;
mod intra;
mod plan;
mod realize;

use serde::Serialize;

use crate::ca::{assign_any_order, CommunityAssignment, CommunitySizes};
use crate::em::EmConfig;
use crate::error::{invalid, Result};
use crate::graph::{degrees, Edge, EdgeList};
use crate::random::{PldParams, Seed};

pub use global::{GlobalReport, GLOBAL_REWIRE_ROUNDS};
pub use intra::{IntraGraph, MergeReport, DROP_FRACTION, MERGE_ROUNDS, STALL_ROUNDS};
pub use plan::{sample_community_sizes, sample_node_plan, NodePlan};
pub use realize::{randomize, IN_MEMORY_NODES};

use realize::Randomization;

/// How a graph with prescribed degrees is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Havel-Hakimi realization randomized by edge swaps.
    Hh,
    /// Configuration model repaired to a simple graph, then swaps.
    Cm,
}

impl std::str::FromStr for Sampler {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hh" => Ok(Sampler::Hh),
            "cm" => Ok(Sampler::Cm),
            _ => Err(format!("unknown sampler `{s}` (expected hh or cm)")),
        }
    }
}

/// Benchmark parameters. Degrees are drawn from `Pld[dmin, dmax)` and
/// community sizes from `Pld[smin, smax)`, upper bounds exclusive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LfrParams {
    pub n: u64,
    pub dmin: u64,
    pub dmax: u64,
    pub gamma: f64,
    /// Nodes belonging to `nu` communities; all others belong to one.
    pub overlap: u64,
    pub nu: u32,
    pub smin: u64,
    pub smax: u64,
    pub beta: f64,
    pub mu: f64,
    pub sampler: Sampler,
    /// Swaps per edge when randomizing a Havel-Hakimi realization.
    pub swaps_factor: f64,
    /// Swaps per edge after configuration-model repair.
    pub cm_swaps_factor: f64,
}

impl LfrParams {
    /// Defaults for `n` nodes without overlap.
    pub fn new(n: u64) -> Self {
        LfrParams {
            n,
            dmin: 10,
            dmax: (n / 20).max(11),
            gamma: 2.0,
            overlap: 0,
            nu: 1,
            smin: 20,
            smax: (n / 10).max(21),
            beta: 1.0,
            mu: 0.2,
            sampler: Sampler::Hh,
            swaps_factor: 10.0,
            cm_swaps_factor: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("need at least two nodes, got {}", self.n));
        }
        PldParams::new(self.dmin, self.dmax, self.gamma)?;
        PldParams::new(self.smin, self.smax, self.beta)?;
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return invalid(format!("mixing parameter must lie in (0, 1), got {}", self.mu));
        }
        if self.overlap > self.n {
            return invalid(format!("{} overlapping nodes exceed n = {}", self.overlap, self.n));
        }
        if self.nu == 0 {
            return invalid("memberships per overlapping node must be at least 1");
        }
        for (name, x) in [("swaps factor", self.swaps_factor), ("cm swaps factor", self.cm_swaps_factor)] {
            if !(x.is_finite() && x >= 0.0) {
                return invalid(format!("{name} must be a non-negative number, got {x}"));
            }
        }
        Ok(())
    }

    fn randomization(&self) -> Randomization {
        Randomization {
            sampler: self.sampler,
            swaps_factor: self.swaps_factor,
            cm_swaps_factor: self.cm_swaps_factor,
        }
    }
}

/// Counters describing what the pipeline had to discard or repair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LfrAudit {
    pub seed: u64,
    pub n: u64,
    pub m: u64,
    pub communities: usize,
    pub memberships: u64,
    pub global_edges: u64,
    pub intra_edges: u64,
    pub global: GlobalReport,
    pub intra_dropped_half_edges: u64,
    /// Communities whose configuration-model repair gave up and which were
    /// sampled from the Havel-Hakimi seed instead.
    pub intra_cm_fallbacks: u64,
    pub merge: MergeReport,
    pub mean_mixing: f64,
}

impl LfrAudit {
    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("audit serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LfrGraph {
    pub edges: EdgeList,
    pub ground_truth: CommunityAssignment,
    pub sizes: CommunitySizes,
    pub plan: NodePlan,
    /// Realized degree, external degree and internal degree per node.
    pub degree: Vec<u64>,
    pub ext_degree: Vec<u64>,
    pub int_degree: Vec<u64>,
    pub audit: LfrAudit,
}

/// Assigns nodes to communities with sizes `sizes`, each node needing
/// room for its largest per-membership internal degree.
pub fn assign_communities(plan: &NodePlan, sizes: &CommunitySizes, seed: Seed) -> Result<CommunityAssignment> {
    let constraints: Vec<u64> = (0..plan.len()).map(|v| plan.constraint(v)).collect();
    assign_any_order(sizes, &constraints, &plan.nu, &mut seed.rng("assign"))
}

pub fn build_lfr(params: &LfrParams, seed: Seed, em: &EmConfig) -> Result<LfrGraph> {
    params.validate()?;
    let plan = sample_node_plan(params, seed)?;
    let sizes = sample_community_sizes(params, plan.total_memberships(), seed)?;
    let truth = assign_communities(&plan, &sizes, seed)?;
    let how = params.randomization();

    let (global, global_report) =
        global::build_global_graph(&plan.d_ext, &truth, &how, &mut seed.rng("global"), em)?;
    let per_community = intra::membership_degrees(&plan, &truth, sizes.len());
    let graphs = intra::build_intra_graphs(&per_community, &how, seed, em)?;
    let intra_dropped: u64 = graphs.iter().map(|g| g.dropped_half_edges).sum();
    let intra_fallbacks = graphs.iter().filter(|g| g.cm_fallback).count() as u64;
    let (merged, merge_report) = intra::community_rewire_and_merge(graphs, &mut seed.rng("merge"))?;

    let n = params.n as usize;
    let ext_degree = degrees(global.as_slice(), n);
    let int_degree = degrees(merged.as_slice(), n);
    let mut all: Vec<Edge> = Vec::with_capacity(global.len() + merged.len());
    all.extend_from_slice(global.as_slice());
    all.extend_from_slice(merged.as_slice());
    all.sort_unstable();
    let edges = EdgeList::from_sorted(all)?;
    let degree: Vec<u64> = ext_degree.iter().zip(&int_degree).map(|(a, b)| a + b).collect();
    let (mut sum, mut counted) = (0.0, 0u64);
    for (e, d) in ext_degree.iter().zip(&degree) {
        if *d > 0 {
            sum += *e as f64 / *d as f64;
            counted += 1;
        }
    }
    let audit = LfrAudit {
        seed: seed.0,
        n: params.n,
        m: edges.len() as u64,
        communities: sizes.len(),
        memberships: sizes.total(),
        global_edges: global.len() as u64,
        intra_edges: merged.len() as u64,
        global: global_report,
        intra_dropped_half_edges: intra_dropped,
        intra_cm_fallbacks: intra_fallbacks,
        merge: merge_report,
        mean_mixing: if counted > 0 { sum / counted as f64 } else { 0.0 },
    };
    Ok(LfrGraph {
        edges,
        ground_truth: truth,
        sizes,
        plan,
        degree,
        ext_degree,
        int_degree,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mu: f64) -> LfrParams {
        let mut p = LfrParams::new(1000);
        p.mu = mu;
        p.dmin = 5;
        p.dmax = 50;
        p.smin = 60;
        p.smax = 150;
        p
    }

    #[test]
    fn validation() {
        let mut p = small(0.2);
        assert!(p.validate().is_ok());
        for mu in [0.0, 1.0, 1.5, f64::NAN] {
            p.mu = mu;
            assert!(p.validate().is_err());
        }
        let mut p = small(0.2);
        p.overlap = 1001;
        assert!(p.validate().is_err());
        let mut p = small(0.2);
        p.dmax = p.dmin;
        assert!(p.validate().is_err());
        let mut p = small(0.2);
        p.nu = 0;
        assert!(p.validate().is_err());
        assert_eq!("cm".parse::<Sampler>(), Ok(Sampler::Cm));
        assert!("x".parse::<Sampler>().is_err());
    }

    #[test]
    fn small_disjoint_fixture() {
        let p = small(0.2);
        let g = build_lfr(&p, Seed(7), &EmConfig::default()).unwrap();
        let a = &g.audit;
        assert_eq!(a.merge.initial_duplicates, 0);
        assert_eq!(a.merge.rounds, 0);
        assert_eq!(a.global.dropped_edges, 0);
        let inside = g.edges.iter().filter(|e| g.ground_truth.share_community(e.u, e.v)).count();
        assert_eq!(inside as u64, a.intra_edges);
        assert!((a.mean_mixing - 0.2).abs() <= 0.02, "{}", a.mean_mixing);
        let sizes = g.sizes.as_slice().to_vec();
        g.ground_truth
            .verify(&sizes, |v, _| g.plan.constraint(v as usize))
            .unwrap();
        assert_eq!(g.degree, degrees(g.edges.as_slice(), 1000));
    }

    #[test]
    fn deterministic_per_seed() {
        let mut p = small(0.3);
        p.overlap = 200;
        p.nu = 2;
        let a = build_lfr(&p, Seed(11), &EmConfig::default()).unwrap();
        let b = build_lfr(&p, Seed(11), &EmConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = build_lfr(&p, Seed(12), &EmConfig::default()).unwrap();
        assert_ne!(a.edges, c.edges);
    }

    #[test]
    fn audit_is_one_json_line() {
        let g = build_lfr(&small(0.4), Seed(1), &EmConfig::default()).unwrap();
        let line = g.audit.to_json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["m"].as_u64(), Some(g.edges.len() as u64));
        assert!(v["merge"]["drop_budget"].as_u64().is_some());
    }

    #[test]
    fn cm_sampler_builds() {
        let mut p = small(0.4);
        p.sampler = Sampler::Cm;
        let g = build_lfr(&p, Seed(2), &EmConfig::default()).unwrap();
        assert!(g.edges.iter().all(|e| !e.is_loop()));
        assert!((g.audit.mean_mixing - 0.4).abs() <= 0.03);
    }
}
