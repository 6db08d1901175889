use std::io::Write;

use rayon::prelude::*;

use super::{avg_local_clustering, degree_assortativity, triangle_count};
use crate::cm::{cm_sample, rewire_to_simple, RepairPolicy};
use crate::em::EmConfig;
use crate::error::{invalid, Result};
use crate::graph::EdgeList;
use crate::lfr::{randomize, IN_MEMORY_NODES};
use crate::random::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Triangles,
    Assortativity,
    Clustering,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Triangles, Metric::Assortativity, Metric::Clustering];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Triangles => "triangles",
            Metric::Assortativity => "assortativity",
            Metric::Clustering => "clustering",
        }
    }

    /// Undefined assortativity is recorded as 0.
    pub fn eval(&self, g: &EdgeList, n: usize) -> f64 {
        match self {
            Metric::Triangles => triangle_count(g) as f64,
            Metric::Assortativity => degree_assortativity(g).unwrap_or(0.0),
            Metric::Clustering => avg_local_clustering(g, n),
        }
    }
}

/// Where every ensemble member starts.
#[derive(Clone, Debug)]
pub enum EnsembleStart {
    /// The same graph for every member.
    Fixed(EdgeList),
    /// An independent repaired configuration-model sample per member.
    ConfigurationModel(Vec<u64>),
}

/// Mean and unbiased standard deviation of one metric per snapshot;
/// snapshot `j` is taken after `j * m` swaps.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub metric: Metric,
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    pub convergence: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleReport {
    pub ensemble: usize,
    pub trajectories: Vec<Trajectory>,
}

impl EnsembleReport {
    pub fn trajectory(&self, metric: Metric) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.metric == metric)
    }
}

/// First snapshot whose mean lies within half the final standard deviation
/// of the final mean and stays there for three snapshots (or until the end).
pub fn convergence_point(mean: &[f64], stddev: &[f64]) -> Option<usize> {
    let (&target, &sd) = (mean.last()?, stddev.last()?);
    let ok = |j: usize| (mean[j] - target).abs() <= sd / 2.0;
    (0..mean.len()).find(|&j| (j..(j + 3).min(mean.len())).all(ok))
}

pub const MIN_ENSEMBLE: usize = 10;

/// Runs `ensemble` independent swap trajectories of `max_multiple * m`
/// swaps each, evaluating `metrics` after every `m` swaps.
pub fn convergence_experiment(
    start: &EnsembleStart,
    ensemble: usize,
    max_multiple: usize,
    metrics: &[Metric],
    seed: Seed,
    em: &EmConfig,
) -> Result<EnsembleReport> {
    if ensemble < MIN_ENSEMBLE {
        return invalid(format!("an ensemble needs at least {MIN_ENSEMBLE} members, got {ensemble}"));
    }
    let em = em.share(rayon::current_num_threads() as u64);
    let members: Vec<Vec<Vec<f64>>> = (0..ensemble)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<f64>>> {
            let mut rng = seed.rng_indexed("member", i as u64);
            let (mut g, n) = match start {
                EnsembleStart::Fixed(g) => (g.clone(), g.node_bound() as usize),
                EnsembleStart::ConfigurationModel(d) => {
                    let multi = cm_sample(d, &mut rng)?;
                    (rewire_to_simple(multi, &mut rng, &RepairPolicy::default(), &em)?.0, d.len())
                }
            };
            let m = g.len() as u64;
            let in_memory = n < IN_MEMORY_NODES;
            let mut snaps = Vec::with_capacity(max_multiple + 1);
            snaps.push(metrics.iter().map(|x| x.eval(&g, n)).collect());
            for _ in 0..max_multiple {
                g = randomize(g, m, in_memory, &mut rng, &em)?;
                snaps.push(metrics.iter().map(|x| x.eval(&g, n)).collect());
            }
            Ok(snaps)
        })
        .collect::<Result<_>>()?;

    let s = ensemble as f64;
    let trajectories = metrics
        .iter()
        .enumerate()
        .map(|(k, &metric)| {
            let (mut mean, mut stddev) = (Vec::new(), Vec::new());
            for j in 0..=max_multiple {
                let vals: Vec<f64> = members.iter().map(|m| m[j][k]).collect();
                let mu = vals.iter().sum::<f64>() / s;
                let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (s - 1.0);
                mean.push(mu);
                stddev.push(var.sqrt());
            }
            let convergence = convergence_point(&mean, &stddev);
            Trajectory {
                metric,
                mean,
                stddev,
                convergence,
            }
        })
        .collect();
    Ok(EnsembleReport {
        ensemble,
        trajectories,
    })
}

pub const CSV_HEADER: &str = "metric,snapshot_swaps_per_m,mean,stddev,S";

pub fn write_convergence_csv<W: Write>(mut out: W, report: &EnsembleReport) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for t in &report.trajectories {
        for (j, (m, sd)) in t.mean.iter().zip(&t.stddev).enumerate() {
            writeln!(out, "{},{j},{m},{sd},{}", t.metric.name(), report.ensemble)?;
        }
    }
    out.flush()?;
    Ok(())
}
