/// Append-only sequence of booleans, read back in append order.
#[derive(Clone, Debug, Default)]
pub struct BitStream {
    words: Vec<u64>,
    len: u64,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitStream {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        let word = (self.len / 64) as usize;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

pub struct BitReader<'a> {
    bits: &'a BitStream,
    pos: u64,
}

impl Iterator for BitReader<'_> {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        if self.pos == self.bits.len {
            return None;
        }
        let w = self.bits.words[(self.pos / 64) as usize];
        let bit = (w >> (self.pos % 64)) & 1 == 1;
        self.pos += 1;
        Some(bit)
    }
}
