//! File formats.
//!
//! Edges: text is one `u<TAB>v` pair per line, 0-based, `u <= v`, sorted.
//! Binary is the magic `EMGR`, a little-endian `u16` version (1), `u64`
//! node count, `u64` edge count and then `m` pairs of little-endian `u64`.
//! Degrees: text is one value per line; binary is `EMDG`, version, `u64`
//! count and the values. Assignments are `node<TAB>community` lines.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::str::FromStr;

use crate::ca::{CommunityAssignment, CommunityId};
use crate::error::{invalid, Error, Result};
use crate::graph::{Edge, Node};

pub const GRAPH_MAGIC: &[u8; 4] = b"EMGR";
pub const DEGREE_MAGIC: &[u8; 4] = b"EMDG";
pub const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Bin,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "bin" => Ok(Format::Bin),
            _ => Err(format!("unknown format `{s}` (expected text or bin)")),
        }
    }
}

/// Edges as read from a file, with the declared (or implied) node count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFile {
    pub n: u64,
    /// Canonical and sorted; repeats and loops are kept.
    pub edges: Vec<Edge>,
}

pub fn write_edges<W: Write>(out: W, n: u64, edges: &[Edge], format: Format) -> Result<()> {
    let mut w = BufWriter::new(out);
    match format {
        Format::Text => {
            for e in edges {
                writeln!(w, "{}\t{}", e.u, e.v)?;
            }
        }
        Format::Bin => {
            w.write_all(GRAPH_MAGIC)?;
            w.write_all(&VERSION.to_le_bytes())?;
            w.write_all(&n.to_le_bytes())?;
            w.write_all(&(edges.len() as u64).to_le_bytes())?;
            for e in edges {
                w.write_all(&e.u.to_le_bytes())?;
                w.write_all(&e.v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads edges; text input is canonicalized and sorted, binary input must
/// already be sorted with `u <= v`.
pub fn read_edges<R: Read>(input: R, format: Format) -> Result<GraphFile> {
    let mut r = BufReader::new(input);
    match format {
        Format::Text => {
            let mut edges = Vec::new();
            for (no, line) in r.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut it = line.split_whitespace().map(str::parse::<Node>);
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(u)), Some(Ok(v)), None) => edges.push(Edge::new(u, v)),
                    _ => return invalid(format!("edge file line {}: expected `u<TAB>v`", no + 1)),
                }
            }
            edges.sort_unstable();
            let n = edges.iter().map(|e| e.v + 1).max().unwrap_or(0);
            Ok(GraphFile { n, edges })
        }
        Format::Bin => {
            read_header(&mut r, GRAPH_MAGIC)?;
            let n = read_u64(&mut r)?;
            let m = read_u64(&mut r)?;
            let mut edges = Vec::with_capacity(m.min(1 << 24) as usize);
            for i in 0..m {
                let (u, v) = (read_u64(&mut r)?, read_u64(&mut r)?);
                let e = Edge { u, v };
                if u > v {
                    return invalid(format!("binary edge {i} has u > v"));
                }
                if v >= n {
                    return invalid(format!("binary edge {i} exceeds the node count {n}"));
                }
                if edges.last().is_some_and(|p| *p > e) {
                    return invalid(format!("binary edges not sorted at position {i}"));
                }
                edges.push(e);
            }
            expect_eof(&mut r)?;
            Ok(GraphFile { n, edges })
        }
    }
}

pub fn write_degrees<W: Write>(out: W, degrees: &[u64], format: Format) -> Result<()> {
    let mut w = BufWriter::new(out);
    match format {
        Format::Text => {
            for d in degrees {
                writeln!(w, "{d}")?;
            }
        }
        Format::Bin => {
            w.write_all(DEGREE_MAGIC)?;
            w.write_all(&VERSION.to_le_bytes())?;
            w.write_all(&(degrees.len() as u64).to_le_bytes())?;
            for d in degrees {
                w.write_all(&d.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_degrees<R: Read>(input: R, format: Format) -> Result<Vec<u64>> {
    let mut r = BufReader::new(input);
    match format {
        Format::Text => {
            let mut out = Vec::new();
            for (no, line) in r.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                out.push(line.parse().map_err(|_| {
                    Error::Validation(format!("degree file line {}: `{line}` is not a degree", no + 1))
                })?);
            }
            Ok(out)
        }
        Format::Bin => {
            read_header(&mut r, DEGREE_MAGIC)?;
            let n = read_u64(&mut r)?;
            let out = (0..n).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>>>()?;
            expect_eof(&mut r)?;
            Ok(out)
        }
    }
}

pub fn write_assignment<W: Write>(out: W, a: &CommunityAssignment) -> Result<()> {
    let mut w = BufWriter::new(out);
    for (v, c) in a.memberships() {
        writeln!(w, "{v}\t{c}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_assignment<R: Read>(input: R) -> Result<CommunityAssignment> {
    let mut pairs = Vec::new();
    for (no, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parsed = (|| {
            let v: Node = it.next()?.parse().ok()?;
            let c: CommunityId = it.next()?.parse().ok()?;
            it.next().is_none().then_some((v, c))
        })();
        match parsed {
            Some(p) => pairs.push(p),
            None => return invalid(format!("assignment line {}: expected `node<TAB>community`", no + 1)),
        }
    }
    Ok(CommunityAssignment::from_pairs(pairs))
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m).map_err(truncated)?;
    if &m != magic {
        return invalid(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        ));
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v).map_err(truncated)?;
    let v = u16::from_le_bytes(v);
    if v != VERSION {
        return invalid(format!("unsupported version {v}"));
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => invalid("trailing bytes after the declared records"),
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Validation("file is truncated".into())
    } else {
        Error::Io(e)
    }
}
