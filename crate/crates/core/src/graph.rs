//! Edge and degree-sequence containers shared by all generators.
//!
//! Node ids are 0-based. An undirected edge `{u, v}` is stored once as
//! `[u, v]` with `u <= v`; lists are kept in lexicographic order.

use std::fmt;

use crate::em::Record;
use crate::error::{invalid, Result};

pub type Node = u64;

/// An undirected edge in canonical orientation (`u <= v`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Edge {
    pub u: Node,
    pub v: Node,
}

impl Edge {
    /// Builds the canonical edge for the unordered pair `{a, b}`.
    #[inline]
    pub fn new(a: Node, b: Node) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    #[inline]
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.u, self.v)
    }
}

impl From<(Node, Node)> for Edge {
    fn from((a, b): (Node, Node)) -> Self {
        Edge::new(a, b)
    }
}

impl Record for Edge {
    const SIZE: usize = 16;

    fn encode(&self, out: &mut [u8]) {
        out[..8].copy_from_slice(&self.u.to_le_bytes());
        out[8..16].copy_from_slice(&self.v.to_le_bytes());
    }

    fn decode(buf: &[u8]) -> Self {
        Edge {
            u: u64::from_le_bytes(buf[..8].try_into().unwrap()),
            v: u64::from_le_bytes(buf[8..16].try_into().unwrap()),
        }
    }
}

/// Lexicographically sorted list of distinct non-loop edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList(Vec<Edge>);

impl EdgeList {
    /// Wraps `edges` after checking it is sorted, canonical and simple.
    pub fn from_sorted(edges: Vec<Edge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.u > e.v {
                return invalid(format!("edge {i} {e:?} is not canonical"));
            }
            if e.is_loop() {
                return invalid(format!("edge {i} {e:?} is a self-loop"));
            }
            if i > 0 && edges[i - 1] >= *e {
                return invalid(format!(
                    "edge list not strictly increasing at position {i} ({:?} then {e:?})",
                    edges[i - 1]
                ));
            }
        }
        Ok(EdgeList(edges))
    }

    /// Canonicalizes and sorts arbitrary pairs, then validates simplicity.
    pub fn from_unsorted(edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut v: Vec<Edge> = edges.into_iter().map(|e| Edge::new(e.u, e.v)).collect();
        v.sort_unstable();
        Self::from_sorted(v)
    }

    pub(crate) fn from_vec_unchecked(edges: Vec<Edge>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        EdgeList(edges)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Edge> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge> {
        self.0.iter()
    }

    /// Number of nodes implied by the largest node id (`max id + 1`).
    pub fn node_bound(&self) -> u64 {
        self.0.iter().map(|e| e.v + 1).max().unwrap_or(0)
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.0.binary_search(e).is_ok()
    }
}

impl From<EdgeList> for MultiEdgeList {
    fn from(list: EdgeList) -> Self {
        MultiEdgeList(list.0)
    }
}

/// Sorted edge list that may contain self-loops and parallel edges.
///
/// The multiplicity of an edge value is the length of its run of equal
/// adjacent entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiEdgeList(Vec<Edge>);

impl MultiEdgeList {
    pub fn from_sorted(edges: Vec<Edge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.u > e.v {
                return invalid(format!("edge {i} {e:?} is not canonical"));
            }
            if i > 0 && edges[i - 1] > *e {
                return invalid(format!("multi-edge list not sorted at position {i}"));
            }
        }
        Ok(MultiEdgeList(edges))
    }

    pub fn from_unsorted(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut v: Vec<Edge> = edges.into_iter().map(|e| Edge::new(e.u, e.v)).collect();
        v.sort_unstable();
        MultiEdgeList(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Edge> {
        self.0
    }

    pub fn is_simple(&self) -> bool {
        self.0.iter().all(|e| !e.is_loop()) && self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Converts to a simple list, failing if a loop or parallel edge remains.
    pub fn into_simple(self) -> Result<EdgeList> {
        EdgeList::from_sorted(self.0)
    }
}

/// Degree of every node in `0..n` (loops count twice).
pub fn degrees(edges: &[Edge], n: usize) -> Vec<u64> {
    let mut deg = vec![0u64; n];
    for e in edges {
        deg[e.u as usize] += 1;
        deg[e.v as usize] += 1;
    }
    deg
}

/// Sorted node degree sequence of a graph, for invariance checks.
pub fn degree_multiset(edges: &[Edge], n: usize) -> Vec<u64> {
    let mut d = degrees(edges, n);
    d.sort_unstable();
    d
}
