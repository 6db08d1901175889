use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};

use super::{EmConfig, Record};
use crate::error::Result;

const MIN_HEAP_ITEMS: usize = 1024;

struct Entry<K, V> {
    key: K,
    seq: u64,
    val: V,
}

impl<K: Ord, V> PartialEq for Entry<K, V> {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key && self.seq == o.seq
    }
}
impl<K: Ord, V> Eq for Entry<K, V> {}
impl<K: Ord, V> PartialOrd for Entry<K, V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<K: Ord, V> Ord for Entry<K, V> {
    fn cmp(&self, o: &Self) -> Ordering {
        (&self.key, self.seq).cmp(&(&o.key, o.seq))
    }
}

struct Run<K, V> {
    reader: BufReader<File>,
    remaining: u64,
    head: Option<Entry<K, V>>,
}

/// Minimum priority queue with stable ties and spill-to-disk.
///
/// Entries with equal keys pop in insertion order. When the resident heap
/// exceeds its quota it is drained into a sorted run on disk; pops merge the
/// heap with the heads of all runs.
pub struct MinPq<K: Record + Ord, V: Record> {
    cfg: EmConfig,
    heap_items: usize,
    heap: BinaryHeap<Reverse<Entry<K, V>>>,
    runs: Vec<Run<K, V>>,
    // (key, seq, run index) of every non-empty run head
    heads: BinaryHeap<Reverse<(K, u64, usize)>>,
    seq: u64,
    len: u64,
}

impl<K: Record + Ord, V: Record> MinPq<K, V> {
    pub fn new(cfg: &EmConfig) -> Self {
        MinPq {
            heap_items: cfg.budget.items(K::SIZE + V::SIZE + 8, MIN_HEAP_ITEMS),
            cfg: cfg.clone(),
            heap: BinaryHeap::new(),
            runs: Vec::new(),
            heads: BinaryHeap::new(),
            seq: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, key: K, val: V) -> Result<()> {
        self.heap.push(Reverse(Entry {
            key,
            seq: self.seq,
            val,
        }));
        self.seq += 1;
        self.len += 1;
        if self.heap.len() >= self.heap_items {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        let file = self.cfg.spill_file()?;
        let mut w = BufWriter::with_capacity(1 << 16, file);
        let mut rec = vec![0u8; K::SIZE + 8 + V::SIZE];
        let count = self.heap.len() as u64;
        while let Some(Reverse(e)) = self.heap.pop() {
            (e.key, e.seq, e.val).encode(&mut rec);
            w.write_all(&rec)?;
        }
        let mut file = w.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(0))?;
        let mut run = Run {
            reader: BufReader::with_capacity(1 << 16, file),
            remaining: count,
            head: None,
        };
        Self::advance(&mut run)?;
        let idx = self.runs.len();
        if let Some(h) = &run.head {
            self.heads.push(Reverse((h.key, h.seq, idx)));
        }
        self.runs.push(run);
        Ok(())
    }

    fn advance(run: &mut Run<K, V>) -> Result<()> {
        if run.remaining == 0 {
            run.head = None;
            return Ok(());
        }
        let mut rec = vec![0u8; K::SIZE + 8 + V::SIZE];
        run.reader.read_exact(&mut rec)?;
        run.remaining -= 1;
        let (key, seq, val) = <(K, u64, V)>::decode(&rec);
        run.head = Some(Entry { key, seq, val });
        Ok(())
    }

    /// Smallest key currently stored.
    pub fn peek_key(&self) -> Option<K> {
        let mem = self.heap.peek().map(|Reverse(e)| (e.key, e.seq));
        let disk = self.heads.peek().map(|Reverse((k, s, _))| (*k, *s));
        match (mem, disk) {
            (Some(a), Some(b)) => Some(if a <= b { a.0 } else { b.0 }),
            (Some(a), None) => Some(a.0),
            (None, Some(b)) => Some(b.0),
            (None, None) => None,
        }
    }

    pub fn pop(&mut self) -> Result<Option<(K, V)>> {
        let mem = self.heap.peek().map(|Reverse(e)| (e.key, e.seq));
        let disk = self.heads.peek().map(|Reverse((k, s, _))| (*k, *s));
        let from_disk = match (mem, disk) {
            (None, None) => return Ok(None),
            (Some(_), None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b < a,
        };
        self.len -= 1;
        if !from_disk {
            let Reverse(e) = self.heap.pop().expect("peeked");
            return Ok(Some((e.key, e.val)));
        }
        let Reverse((_, _, idx)) = self.heads.pop().expect("peeked");
        let run = &mut self.runs[idx];
        let e = run.head.take().expect("run head present");
        Self::advance(run)?;
        if let Some(h) = &run.head {
            self.heads.push(Reverse((h.key, h.seq, idx)));
        }
        Ok(Some((e.key, e.val)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn drain(pq: &mut MinPq<u64, u64>) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        while let Some(x) = pq.pop().unwrap() {
            out.push(x);
        }
        out
    }

    #[test]
    fn pops_in_priority_then_insertion_order() {
        let mut pq = MinPq::new(&EmConfig::default());
        for (i, k) in [5u64, 1, 5, 3, 1].into_iter().enumerate() {
            pq.push(k, i as u64).unwrap();
        }
        assert_eq!(pq.peek_key(), Some(1));
        assert_eq!(drain(&mut pq), vec![(1, 1), (1, 4), (3, 3), (5, 0), (5, 2)]);
        assert!(pq.is_empty());
    }

    proptest! {
        #[test]
        fn interleaved_ops_match_reference(
            ops in proptest::collection::vec((any::<bool>(), 0u64..50), 0..6000),
            budget in 1u64..50_000,
        ) {
            let mut pq = MinPq::new(&EmConfig::with_budget(budget));
            let mut reference: Vec<(u64, u64)> = Vec::new();
            for (seq, (is_pop, key)) in ops.into_iter().enumerate() {
                if is_pop {
                    let expected = reference
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, e)| **e)
                        .map(|(i, _)| i)
                        .map(|i| reference.remove(i));
                    prop_assert_eq!(pq.pop().unwrap(), expected);
                } else {
                    pq.push(key, seq as u64).unwrap();
                    reference.push((key, seq as u64));
                }
                prop_assert_eq!(pq.len(), reference.len() as u64);
            }
        }
    }
}
