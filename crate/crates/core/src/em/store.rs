use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};

use super::{EmConfig, Record};
use crate::error::Result;

const MIN_RESIDENT_ITEMS: usize = 4096;

/// Appendable sequence of records with sequential read-back.
///
/// Items stay in memory until the configured share of the budget is
/// exceeded; from then on the whole sequence lives in a temporary file.
pub struct SequenceStore<T: Record> {
    cfg: EmConfig,
    resident_items: usize,
    mem: Vec<T>,
    disk: Option<BufWriter<File>>,
    len: u64,
}

impl<T: Record> SequenceStore<T> {
    pub fn new(cfg: &EmConfig) -> Self {
        SequenceStore {
            resident_items: cfg.budget.items(T::SIZE, MIN_RESIDENT_ITEMS),
            cfg: cfg.clone(),
            mem: Vec::new(),
            disk: None,
            len: 0,
        }
    }

    pub fn from_iter_with(cfg: &EmConfig, items: impl IntoIterator<Item = T>) -> Result<Self> {
        let mut s = Self::new(cfg);
        for x in items {
            s.push(x)?;
        }
        Ok(s)
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_spilled(&self) -> bool {
        self.disk.is_some()
    }

    pub fn push(&mut self, item: T) -> Result<()> {
        self.len += 1;
        if let Some(w) = &mut self.disk {
            let mut rec = vec![0u8; T::SIZE];
            item.encode(&mut rec);
            w.write_all(&rec)?;
            return Ok(());
        }
        self.mem.push(item);
        if self.mem.len() > self.resident_items {
            let mut w = BufWriter::with_capacity(1 << 16, self.cfg.spill_file()?);
            let mut rec = vec![0u8; T::SIZE];
            for x in self.mem.drain(..) {
                x.encode(&mut rec);
                w.write_all(&rec)?;
            }
            self.mem = Vec::new();
            self.disk = Some(w);
        }
        Ok(())
    }

    /// Sequential reader over the whole sequence.
    pub fn reader(&mut self) -> Result<SequenceReader<'_, T>> {
        match &mut self.disk {
            None => Ok(SequenceReader::Memory(self.mem.iter())),
            Some(w) => {
                w.flush()?;
                let mut f = w.get_ref().try_clone()?;
                f.seek(SeekFrom::Start(0))?;
                Ok(SequenceReader::Disk {
                    reader: BufReader::with_capacity(1 << 16, f),
                    remaining: self.len,
                    rec: vec![0u8; T::SIZE],
                })
            }
        }
    }

    /// Collects the sequence into memory.
    pub fn to_vec(&mut self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.len as usize);
        let mut r = self.reader()?;
        while let Some(x) = r.next_item()? {
            out.push(x);
        }
        Ok(out)
    }
}

pub enum SequenceReader<'a, T: Record> {
    Memory(std::slice::Iter<'a, T>),
    Disk {
        reader: BufReader<File>,
        remaining: u64,
        rec: Vec<u8>,
    },
}

impl<T: Record> SequenceReader<'_, T> {
    pub fn next_item(&mut self) -> Result<Option<T>> {
        match self {
            SequenceReader::Memory(it) => Ok(it.next().copied()),
            SequenceReader::Disk {
                reader,
                remaining,
                rec,
            } => {
                if *remaining == 0 {
                    return Ok(None);
                }
                reader.read_exact(rec)?;
                *remaining -= 1;
                Ok(Some(T::decode(rec)))
            }
        }
    }
}
