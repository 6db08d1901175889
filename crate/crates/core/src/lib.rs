//! Generators for massive LFR benchmark graphs built from streaming,
//! I/O-efficient building blocks.
//!
//! The crate is organized bottom-up:
//!
//! * [`em`]: sorter, priority queue, bit stream and sequence store with
//!   spill-to-disk under a memory budget, plus Time Forward Processing;
//! * [`random`]: seeded streams, powerlaw sampling, rounding helpers;
//! * [`hh`]: deterministic degree-sequence realization over a
//!   run-length-compressed group list;
//! * [`swap`]: batched edge switching with dependency chains, and the
//!   sequential reference it must agree with;
//! * [`cm`]: configuration-model sampling and repair to a simple graph;
//! * [`ca`]: community assignment under size constraints;
//! * [`lfr`]: the full benchmark pipeline;
//! * [`metrics`]: graph measures and the ensemble convergence harness;
//! * [`io`]: text and binary file formats.

pub mod ca;
pub mod cm;
pub mod em;
mod error;
pub mod graph;
pub mod hh;
pub mod io;
pub mod lfr;
pub mod metrics;
pub mod random;
pub mod swap;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeList, MultiEdgeList, Node};
