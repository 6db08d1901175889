//! External-memory building blocks.
//!
//! Every container here keeps at most its share of a [`MemoryBudget`]
//! resident and spills fixed-size records to temporary files beyond that.
//! Reading is always sequential, so the access patterns stay scan- or
//! sort-bound even when the working set lives on disk.

mod bits;
mod pq;
mod record;
mod sorter;
mod store;
mod tfp;

use std::path::PathBuf;

pub use bits::{BitReader, BitStream};
pub use pq::MinPq;
pub use record::Record;
pub use sorter::Sorter;
pub use store::{SequenceReader, SequenceStore};
pub use tfp::{tfp_send_receive, TimeForward};

/// Bytes of working memory a pipeline may keep resident.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MemoryBudget(u64);

impl MemoryBudget {
    pub const DEFAULT: MemoryBudget = MemoryBudget(256 << 20);

    /// A budget of `bytes`; zero is rounded up to one byte.
    pub fn new(bytes: u64) -> Self {
        MemoryBudget(bytes.max(1))
    }

    pub fn bytes(&self) -> u64 {
        self.0
    }

    /// Equal share of this budget for one of `structures` live containers.
    pub fn share(&self, structures: u64) -> MemoryBudget {
        MemoryBudget::new(self.0 / structures.max(1))
    }

    /// How many records of `size` bytes fit, never fewer than `floor`.
    pub(crate) fn items(&self, size: usize, floor: usize) -> usize {
        ((self.0 / size.max(1) as u64) as usize).max(floor)
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget::DEFAULT
    }
}

/// Memory budget plus an optional directory for spill files.
#[derive(Clone, Debug, Default)]
pub struct EmConfig {
    pub budget: MemoryBudget,
    pub spill_dir: Option<PathBuf>,
}

impl EmConfig {
    pub fn with_budget(bytes: u64) -> Self {
        EmConfig {
            budget: MemoryBudget::new(bytes),
            spill_dir: None,
        }
    }

    /// Configuration for one of `structures` containers sharing this budget.
    pub fn share(&self, structures: u64) -> EmConfig {
        EmConfig {
            budget: self.budget.share(structures),
            spill_dir: self.spill_dir.clone(),
        }
    }

    pub(crate) fn spill_file(&self) -> std::io::Result<std::fs::File> {
        match &self.spill_dir {
            Some(dir) => tempfile::tempfile_in(dir),
            None => tempfile::tempfile(),
        }
    }
}
