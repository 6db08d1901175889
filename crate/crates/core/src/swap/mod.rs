//! Edge switching.
//!
//! A swap `(a, b, d)` takes the edges with ids `a` and `b` and exchanges
//! their endpoints; it is executed only if neither result is a self-loop and
//! neither result is already present. [`run_swaps`] processes long swap
//! sequences in batched runs through an external-memory pipeline and yields
//! exactly what the sequential [`sequential_swap_oracle`] yields.
//!
//! Edge ids are positions in the sorted edge list at the start of a run.
//! After every run the list is re-sorted and ids are reassigned, on both the
//! pipeline and the oracle side.

mod oracle;
mod pipeline;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::em::Record;
use crate::error::{invalid, Error, Result};
use crate::graph::Edge;

pub(crate) use oracle::apply_sequential;
pub use oracle::{sequential_swap_oracle, sequential_swap_oracle_multigraph};
pub use pipeline::{dependency_stats, run_swaps, run_swaps_multigraph};

/// Two edge ids and the direction flag selecting how endpoints are exchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwapDescriptor {
    pub a: u64,
    pub b: u64,
    pub d: bool,
}

impl SwapDescriptor {
    pub fn new(a: u64, b: u64, d: bool) -> Self {
        SwapDescriptor { a, b, d }
    }
}

impl Record for SwapDescriptor {
    const SIZE: usize = 17;

    fn encode(&self, out: &mut [u8]) {
        (self.a, self.b, self.d).encode(out)
    }

    fn decode(buf: &[u8]) -> Self {
        let (a, b, d) = <(u64, u64, bool)>::decode(buf);
        SwapDescriptor { a, b, d }
    }
}

/// Result edges of swapping `[a1, a2]` with `[b1, b2]`: `{a1, b1}, {a2, b2}`
/// if `d` is false, `{a1, b2}, {a2, b1}` otherwise. Loops are returned as is.
#[inline]
pub fn swapped_edges(ea: Edge, eb: Edge, d: bool) -> (Edge, Edge) {
    if d {
        (Edge::new(ea.u, eb.v), Edge::new(ea.v, eb.u))
    } else {
        (Edge::new(ea.u, eb.u), Edge::new(ea.v, eb.v))
    }
}

/// Whether the result pair can be legal at all, before consulting the graph.
#[inline]
pub(crate) fn shape_legal(t1: Edge, t2: Edge) -> bool {
    !t1.is_loop() && !t2.is_loop() && t1 != t2
}

/// Swaps per run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub run_size: usize,
}

impl RunConfig {
    pub fn new(run_size: usize) -> Result<Self> {
        if run_size == 0 {
            return invalid("run size must be at least 1");
        }
        Ok(RunConfig { run_size })
    }

    /// `max(1, m / 8)`.
    pub fn default_for(m: usize) -> Self {
        RunConfig {
            run_size: (m / 8).max(1),
        }
    }
}

/// `k` swaps with ids uniform over `0..m` (`a != b`) and a fair direction.
pub fn draw_random_swaps<R: Rng + ?Sized>(m: u64, k: usize, rng: &mut R) -> Result<Vec<SwapDescriptor>> {
    if m < 2 {
        return invalid(format!("random swaps need at least two edges, got {m}"));
    }
    Ok((0..k).map(|_| draw_swap(m, rng)).collect())
}

#[inline]
pub(crate) fn draw_swap<R: Rng + ?Sized>(m: u64, rng: &mut R) -> SwapDescriptor {
    let a = rng.random_range(0..m);
    let b = loop {
        let b = rng.random_range(0..m);
        if b != a {
            break b;
        }
    };
    SwapDescriptor::new(a, b, rng.random())
}

/// Counters collected while running swaps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwapStats {
    pub runs: u64,
    pub executed: u64,
    pub skipped: u64,
    /// Full sequential passes over the edge list.
    pub edge_scans: u64,
    /// Number of swaps by how many edge-state combinations were simulated.
    pub configurations: BTreeMap<u64, u64>,
    /// Sorted, deduplicated values of edges rewritten in some run.
    pub touched: Vec<Edge>,
}

impl SwapStats {
    /// Fraction of swaps that simulated exactly one combination.
    pub fn single_configuration_fraction(&self) -> f64 {
        let total: u64 = self.configurations.values().sum();
        if total == 0 {
            return 1.0;
        }
        self.configurations.get(&1).copied().unwrap_or(0) as f64 / total as f64
    }

    /// Configuration histogram normalized to fractions.
    pub fn configuration_histogram(&self) -> Vec<(u64, f64)> {
        let total: u64 = self.configurations.values().sum();
        self.configurations
            .iter()
            .map(|(&k, &c)| (k, c as f64 / total.max(1) as f64))
            .collect()
    }
}

pub(crate) fn check_ids(swaps: &[SwapDescriptor], m: u64) -> Result<()> {
    for (i, s) in swaps.iter().enumerate() {
        if s.a >= m || s.b >= m {
            return invalid(format!(
                "swap {i} references edge id {} but the graph has {m} edges",
                s.a.max(s.b)
            ));
        }
        if s.a == s.b {
            return invalid(format!("swap {i} uses edge {} twice", s.a));
        }
    }
    Ok(())
}

/// Writes one `a b d` line per swap (`d` as 0 or 1).
pub fn write_swap_trace<W: Write>(mut out: W, swaps: &[SwapDescriptor]) -> Result<()> {
    for s in swaps {
        writeln!(out, "{} {} {}", s.a, s.b, s.d as u8)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_swap_trace<R: BufRead>(input: R) -> Result<Vec<SwapDescriptor>> {
    let mut out = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = || -> Option<SwapDescriptor> {
            let mut it = line.split_whitespace();
            let a = it.next()?.parse().ok()?;
            let b = it.next()?.parse().ok()?;
            let d = match it.next()? {
                "0" => false,
                "1" => true,
                _ => return None,
            };
            it.next().is_none().then_some(SwapDescriptor::new(a, b, d))
        };
        out.push(parse().ok_or_else(|| {
            Error::Validation(format!("swap trace line {}: expected `a b d`", no + 1))
        })?);
    }
    Ok(out)
}
