//! Graph text formats, order files and the binary label index.
//!
//! Index layout (all integers little-endian u32):
//!
//! ```text
//! magic   8 bytes  "DAGHL\0v1"
//! n       u32
//! flags   u32      bit 0: labels built with a relaxed tail
//! order   n × u32  vertex id of each rank
//! body    per vertex: len_out, len_out × rank, len_in, len_in × rank
//! ```

use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::IoError;
use crate::graph::{Rank, Vertex, VertexOrder};
use crate::labels::HubLabels;

pub const MAGIC: [u8; 8] = *b"DAGHL\0v1";

pub const FLAG_RELAXED: u32 = 1;

/// Edges as read plus the vertex count from a problem line, if any.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<(Vertex, Vertex)>,
    pub n_hint: Option<usize>,
}

fn parse_id(tok: Option<&str>, line: usize, what: &str) -> Result<u64, IoError> {
    let tok = tok.ok_or_else(|| IoError::Parse { line, reason: format!("missing {what}") })?;
    if !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(IoError::Parse { line, reason: format!("{what} {tok:?} is not a decimal integer") });
    }
    let v: u64 = tok
        .parse()
        .map_err(|_| IoError::Parse { line, reason: format!("{what} {tok:?} out of range") })?;
    if v > u32::MAX as u64 {
        return Err(IoError::Parse { line, reason: format!("{what} {v} exceeds 32 bits") });
    }
    Ok(v)
}

/// Plain edge list: `u v` per line, `#`/`%` comments, optional leading `p n m`.
pub fn parse_edge_list(reader: impl BufRead) -> Result<EdgeList, IoError> {
    let mut out = EdgeList::default();
    let mut seen_content = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_ascii_whitespace();
        if !seen_content && trimmed.starts_with('p') {
            toks.next();
            let n = parse_id(toks.next(), line_no, "vertex count")?;
            parse_id(toks.next(), line_no, "edge count")?;
            out.n_hint = Some(n as usize);
            seen_content = true;
            continue;
        }
        seen_content = true;
        let u = parse_id(toks.next(), line_no, "source")?;
        let v = parse_id(toks.next(), line_no, "target")?;
        if let Some(extra) = toks.next() {
            return Err(IoError::Parse { line: line_no, reason: format!("unexpected token {extra:?}") });
        }
        out.edges.push((u as Vertex, v as Vertex));
    }
    Ok(out)
}

/// DIMACS arcs: `c` comments, `p <tag> n m`, `a u v [w]` with 1-based ids.
pub fn parse_dimacs(reader: impl BufRead) -> Result<EdgeList, IoError> {
    let mut out = EdgeList::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let mut toks = line.split_ascii_whitespace();
        match toks.next() {
            None | Some("c") => {}
            Some("p") => {
                if out.n_hint.is_some() {
                    return Err(IoError::Parse { line: line_no, reason: "duplicate problem line".into() });
                }
                toks.next().ok_or_else(|| IoError::Parse { line: line_no, reason: "missing problem tag".into() })?;
                let n = parse_id(toks.next(), line_no, "vertex count")?;
                parse_id(toks.next(), line_no, "arc count")?;
                out.n_hint = Some(n as usize);
            }
            Some("a") => {
                if out.n_hint.is_none() {
                    return Err(IoError::MissingHeader);
                }
                let mut endpoint = |what| -> Result<Vertex, IoError> {
                    let id = parse_id(toks.next(), line_no, what)?;
                    id.checked_sub(1)
                        .map(|x| x as Vertex)
                        .ok_or_else(|| IoError::Parse { line: line_no, reason: format!("{what} 0 in 1-based ids") })
                };
                let u = endpoint("source")?;
                let v = endpoint("target")?;
                out.edges.push((u, v));
            }
            Some(tag) if tag.starts_with('c') => {}
            Some(tag) => {
                return Err(IoError::Parse { line: line_no, reason: format!("unknown line type {tag:?}") });
            }
        }
    }
    if out.n_hint.is_none() {
        return Err(IoError::MissingHeader);
    }
    Ok(out)
}

/// Writes `p n m` followed by one `u v` line per edge.
pub fn write_edge_list(mut w: impl Write, n: usize, edges: &[(Vertex, Vertex)]) -> std::io::Result<()> {
    writeln!(w, "p {} {}", n, edges.len())?;
    for &(u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

/// Serializes labels into the index byte layout.
pub fn encode_labels(labels: &HubLabels) -> Vec<u8> {
    let n = labels.num_vertices();
    let mut buf = Vec::with_capacity(16 + 4 * (n * 3 + labels.total_entries()));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    let flags = if labels.is_relaxed() { FLAG_RELAXED } else { 0 };
    buf.extend_from_slice(&flags.to_le_bytes());
    for &v in labels.order().as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in 0..n as Vertex {
        for arr in [labels.l_out(v), labels.l_in(v)] {
            buf.extend_from_slice(&(arr.len() as u32).to_le_bytes());
            for &r in arr {
                buf.extend_from_slice(&r.to_le_bytes());
            }
        }
    }
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u32(&mut self) -> Result<u32, IoError> {
        let end = self.pos + 4;
        let chunk = self.bytes.get(self.pos..end).ok_or(IoError::Truncated)?;
        self.pos = end;
        Ok(u32::from_le_bytes(chunk.try_into().expect("4-byte chunk")))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Parses and validates an index image.
pub fn decode_labels(bytes: &[u8]) -> Result<HubLabels, IoError> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) { IoError::Truncated } else { IoError::BadMagic });
    }
    if bytes[..8] != MAGIC {
        return Err(IoError::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 8 };
    let n = cur.u32()?;
    let flags = cur.u32()?;
    if flags & !FLAG_RELAXED != 0 {
        return Err(IoError::CorruptLengths(format!("unknown flag bits {flags:#x}")));
    }
    if (n as usize).saturating_mul(4) > cur.remaining() {
        return Err(IoError::Truncated);
    }
    let order: Vec<Vertex> = (0..n).map(|_| cur.u32()).collect::<Result<_, _>>()?;
    let order = VertexOrder::from_order(order).map_err(|reason| IoError::NotAPermutation { n, reason })?;

    let mut l_out = Vec::with_capacity(n as usize);
    let mut l_in = Vec::with_capacity(n as usize);
    for v in 0..n {
        for side in [&mut l_out, &mut l_in] {
            let len = cur.u32()?;
            if len > n {
                return Err(IoError::CorruptLengths(format!("vertex {v} declares {len} hubs, n = {n}")));
            }
            if (len as usize) * 4 > cur.remaining() {
                return Err(IoError::Truncated);
            }
            let arr: Vec<Rank> = (0..len).map(|_| cur.u32()).collect::<Result<_, _>>()?;
            if let Some(&rank) = arr.iter().find(|&&r| r >= n) {
                return Err(IoError::RankOutOfRange { vertex: v, rank, n });
            }
            if arr.windows(2).any(|w| w[0] >= w[1]) {
                return Err(IoError::UnsortedLabel(v));
            }
            side.push(arr);
        }
    }
    if cur.remaining() != 0 {
        return Err(IoError::CorruptLengths(format!("{} trailing bytes", cur.remaining())));
    }
    Ok(HubLabels::from_parts(order, l_out, l_in, flags & FLAG_RELAXED != 0))
}

pub fn save_labels(path: impl AsRef<Path>, labels: &HubLabels) -> Result<(), IoError> {
    fs::write(path, encode_labels(labels))?;
    Ok(())
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<HubLabels, IoError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_labels(&bytes)
}

/// Reads one vertex id per line; the result must be a permutation of `0..n`.
pub fn parse_order(reader: impl BufRead, n: usize) -> Result<VertexOrder, IoError> {
    let mut order = Vec::with_capacity(n);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        order.push(parse_id(Some(t), i + 1, "vertex id")? as Vertex);
    }
    let n32 = n as u32;
    if order.len() != n {
        return Err(IoError::NotAPermutation { n: n32, reason: format!("{} ids listed", order.len()) });
    }
    VertexOrder::from_order(order).map_err(|reason| IoError::NotAPermutation { n: n32, reason })
}

pub fn load_order(path: impl AsRef<Path>, n: usize) -> Result<VertexOrder, IoError> {
    parse_order(std::io::BufReader::new(fs::File::open(path)?), n)
}
