use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};

use super::{EmConfig, Record};
use crate::error::{Error, Result};

const MIN_RUN_ITEMS: usize = 1024;

struct SpilledRun {
    file: File,
    len: u64,
}

struct RunCursor {
    reader: BufReader<File>,
    remaining: u64,
    buf: Vec<u8>,
}

impl RunCursor {
    fn open(run: &SpilledRun, record_size: usize) -> Result<Self> {
        let mut file = run.file.try_clone()?;
        file.seek(SeekFrom::Start(0))?;
        Ok(RunCursor {
            reader: BufReader::with_capacity(1 << 16, file),
            remaining: run.len,
            buf: vec![0u8; record_size],
        })
    }

    fn read<T: Record>(&mut self) -> Result<Option<T>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.reader.read_exact(&mut self.buf)?;
        self.remaining -= 1;
        Ok(Some(T::decode(&self.buf)))
    }
}

enum Mode<T> {
    Filling,
    /// Everything fit in memory: a cursor into the sorted buffer.
    InMemory { pos: usize },
    /// K-way merge of spilled runs plus the sorted in-memory tail. The run
    /// index breaks ties so equal keys come out in insertion order.
    Merging {
        cursors: Vec<RunCursor>,
        heap: BinaryHeap<Reverse<(T, usize)>>,
        tail_pos: usize,
    },
}

/// Two-phase container: write-only filling, then sorted read-only streaming.
///
/// Items are pushed in any order; after [`Sorter::finish`] they are
/// delivered in non-decreasing order, equal items in insertion order. The
/// stream can be restarted with [`Sorter::rewind`].
pub struct Sorter<T: Record + Ord> {
    cfg: EmConfig,
    run_items: usize,
    buffer: Vec<T>,
    runs: Vec<SpilledRun>,
    len: u64,
    mode: Mode<T>,
}

impl<T: Record + Ord> Sorter<T> {
    pub fn new(cfg: &EmConfig) -> Self {
        Sorter {
            run_items: cfg.budget.items(T::SIZE, MIN_RUN_ITEMS),
            cfg: cfg.clone(),
            buffer: Vec::new(),
            runs: Vec::new(),
            len: 0,
            mode: Mode::Filling,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_reading(&self) -> bool {
        !matches!(self.mode, Mode::Filling)
    }

    /// Number of runs written to disk so far.
    pub fn spilled_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn push(&mut self, item: T) -> Result<()> {
        if self.is_reading() {
            return Err(Error::Usage("push into a sorter in reading mode".into()));
        }
        self.buffer.push(item);
        self.len += 1;
        if self.buffer.len() >= self.run_items {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        self.buffer.sort();
        let file = self.cfg.spill_file()?;
        let mut w = BufWriter::with_capacity(1 << 16, file);
        let mut rec = vec![0u8; T::SIZE];
        for item in &self.buffer {
            item.encode(&mut rec);
            w.write_all(&rec)?;
        }
        let file = w.into_inner().map_err(|e| e.into_error())?;
        self.runs.push(SpilledRun {
            file,
            len: self.buffer.len() as u64,
        });
        self.buffer.clear();
        Ok(())
    }

    /// Switches from filling to reading.
    pub fn finish(&mut self) -> Result<()> {
        if self.is_reading() {
            return Err(Error::Usage("sorter already switched to reading".into()));
        }
        self.buffer.sort();
        self.start_stream()
    }

    fn start_stream(&mut self) -> Result<()> {
        if self.runs.is_empty() {
            self.mode = Mode::InMemory { pos: 0 };
            return Ok(());
        }
        let mut cursors = Vec::with_capacity(self.runs.len());
        let mut heap = BinaryHeap::with_capacity(self.runs.len() + 1);
        for (i, run) in self.runs.iter().enumerate() {
            let mut c = RunCursor::open(run, T::SIZE)?;
            if let Some(x) = c.read::<T>()? {
                heap.push(Reverse((x, i)));
            }
            cursors.push(c);
        }
        let tail = self.runs.len();
        if let Some(&x) = self.buffer.first() {
            heap.push(Reverse((x, tail)));
        }
        self.mode = Mode::Merging {
            cursors,
            heap,
            tail_pos: 1,
        };
        Ok(())
    }

    /// Restarts the sorted stream from its first element.
    pub fn rewind(&mut self) -> Result<()> {
        if !self.is_reading() {
            return Err(Error::Usage("rewind of a sorter still filling".into()));
        }
        self.start_stream()
    }

    /// Drops all contents and returns to filling mode.
    pub fn clear(&mut self) {
        self.buffer.clear();
        self.runs.clear();
        self.len = 0;
        self.mode = Mode::Filling;
    }

    pub fn peek(&mut self) -> Result<Option<T>> {
        match &self.mode {
            Mode::Filling => Err(Error::Usage("read from a sorter still filling".into())),
            Mode::InMemory { pos } => Ok(self.buffer.get(*pos).copied()),
            Mode::Merging { heap, .. } => Ok(heap.peek().map(|Reverse((x, _))| *x)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Result<Option<T>> {
        match &mut self.mode {
            Mode::Filling => Err(Error::Usage("read from a sorter still filling".into())),
            Mode::InMemory { pos } => {
                let item = self.buffer.get(*pos).copied();
                if item.is_some() {
                    *pos += 1;
                }
                Ok(item)
            }
            Mode::Merging {
                cursors,
                heap,
                tail_pos,
            } => {
                let Some(Reverse((x, src))) = heap.pop() else {
                    return Ok(None);
                };
                let refill = if src == cursors.len() {
                    let next = self.buffer.get(*tail_pos).copied();
                    *tail_pos += 1;
                    next
                } else {
                    cursors[src].read::<T>()?
                };
                if let Some(y) = refill {
                    heap.push(Reverse((y, src)));
                }
                Ok(Some(x))
            }
        }
    }

    /// Drains the remaining stream into a vector (test and small-data helper).
    pub fn drain_to_vec(&mut self) -> Result<Vec<T>> {
        let mut out = Vec::new();
        while let Some(x) = self.next()? {
            out.push(x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted_through(items: &[u64], cfg: &EmConfig) -> Vec<u64> {
        let mut s = Sorter::new(cfg);
        for &x in items {
            s.push(x).unwrap();
        }
        s.finish().unwrap();
        s.drain_to_vec().unwrap()
    }

    #[test]
    fn three_elements() {
        assert_eq!(sorted_through(&[3, 1, 2], &EmConfig::default()), vec![1, 2, 3]);
    }

    #[test]
    fn empty_stream() {
        assert!(sorted_through(&[], &EmConfig::default()).is_empty());
    }

    #[test]
    fn protocol_violations_are_usage_errors() {
        let mut s: Sorter<u64> = Sorter::new(&EmConfig::default());
        assert!(matches!(s.next(), Err(Error::Usage(_))));
        assert!(matches!(s.rewind(), Err(Error::Usage(_))));
        s.push(1).unwrap();
        s.finish().unwrap();
        assert!(matches!(s.push(2), Err(Error::Usage(_))));
        assert!(matches!(s.finish(), Err(Error::Usage(_))));
    }

    #[test]
    fn million_keys_under_one_mebibyte() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let items: Vec<u64> = (0..1_000_000).map(|_| rng.random()).collect();
        let cfg = EmConfig::with_budget(1 << 20);
        let mut s = Sorter::new(&cfg);
        for &x in &items {
            s.push(x).unwrap();
        }
        s.finish().unwrap();
        assert!(s.spilled_runs() > 1);
        let got = s.drain_to_vec().unwrap();
        let mut reference = items;
        reference.sort_unstable();
        assert_eq!(got, reference);
    }

    #[test]
    fn rewind_restarts_spilled_stream() {
        let cfg = EmConfig::with_budget(64);
        let mut s = Sorter::new(&cfg);
        for x in (0..5000u64).rev() {
            s.push(x % 977).unwrap();
        }
        s.finish().unwrap();
        let first = s.drain_to_vec().unwrap();
        s.rewind().unwrap();
        assert_eq!(s.peek().unwrap(), Some(0));
        assert_eq!(s.drain_to_vec().unwrap(), first);
    }

    #[test]
    fn equal_keys_keep_insertion_order() {
        // Ordering only on the key; the payload records insertion position.
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        struct Keyed(u64, u64);
        impl PartialOrd for Keyed {
            fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Keyed {
            fn cmp(&self, o: &Self) -> std::cmp::Ordering {
                self.0.cmp(&o.0)
            }
        }
        impl Record for Keyed {
            const SIZE: usize = 16;
            fn encode(&self, out: &mut [u8]) {
                (self.0, self.1).encode(out)
            }
            fn decode(buf: &[u8]) -> Self {
                let (a, b) = <(u64, u64)>::decode(buf);
                Keyed(a, b)
            }
        }
        let cfg = EmConfig::with_budget(16 * 1024);
        let mut s = Sorter::new(&cfg);
        for i in 0..10_000u64 {
            s.push(Keyed(i % 7, i)).unwrap();
        }
        s.finish().unwrap();
        let out = s.drain_to_vec().unwrap();
        for w in out.windows(2) {
            assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1));
        }
    }

    proptest! {
        #[test]
        fn output_is_sorted_permutation(
            items in proptest::collection::vec(0u64..1000, 0..4000),
            budget in 16u64..40_000,
        ) {
            let got = sorted_through(&items, &EmConfig::with_budget(budget));
            let mut reference = items.clone();
            reference.sort_unstable();
            prop_assert_eq!(got, reference);
        }
    }
}
