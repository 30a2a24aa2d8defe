//! Edge lists and TZSK sketch files.

use std::fmt::Write as _;

use tzmpc_core::graph::GraphError;
use tzmpc_core::tz::{tz_stretch, BunchEntry, DistanceSketch, Pivot, SketchSet};
use tzmpc_core::{VertexId, Weight, WeightedGraph};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: negative weight")]
    NegativeWeight { line: usize },
    #[error("sketch file: {0}")]
    Sketch(&'static str),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

/// First line `n`, then `u v w` lines; `#` starts a comment. Parallel edges
/// keep their smallest weight.
pub fn parse_edge_list(text: &str) -> Result<WeightedGraph, FormatError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(VertexId, VertexId, Weight)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some(n) = n else {
            if toks.len() != 1 {
                return Err(parse_err(line, "expected vertex count"));
            }
            n = Some(toks[0].parse().map_err(|_| parse_err(line, format!("bad vertex count {:?}", toks[0])))?);
            continue;
        };
        if toks.len() != 3 {
            return Err(parse_err(line, "expected `u v w`"));
        }
        if toks[2].starts_with('-') {
            return Err(FormatError::NegativeWeight { line });
        }
        let num = |t: &str| t.parse::<u64>().map_err(|_| parse_err(line, format!("bad number {t:?}")));
        let (u, v, w) = (num(toks[0])?, num(toks[1])?, num(toks[2])?);
        if u >= n as u64 || v >= n as u64 {
            return Err(parse_err(line, format!("vertex out of range for n={n}")));
        }
        if u == v {
            return Err(parse_err(line, "self-loop"));
        }
        edges.push((u as VertexId, v as VertexId, w));
    }
    let n = n.ok_or_else(|| parse_err(1, "empty file"))?;
    WeightedGraph::from_edges(n, edges).map_err(|e: GraphError| parse_err(0, e.to_string()))
}

pub fn write_edge_list(g: &WeightedGraph) -> String {
    let mut s = String::with_capacity(16 * g.m() + 8);
    let _ = writeln!(s, "{}", g.n());
    for e in g.edges() {
        let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
    }
    s
}

const MAGIC: &[u8; 4] = b"TZSK";
const VERSION: u16 = 1;
const NO_PIVOT: u32 = u32::MAX;

/// Little-endian TZSK: header (magic, version u16, n u32, k u32, seed u64),
/// then per vertex k pivots (id u32, dist u64), a bunch count u32 and
/// (id u32, level u8, dist u64) triples sorted by id.
pub fn encode_sketches(s: &SketchSet) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(s.n() as u32).to_le_bytes());
    out.extend_from_slice(&s.k.to_le_bytes());
    out.extend_from_slice(&s.seed.to_le_bytes());
    for sk in &s.sketches {
        for p in &sk.pivots {
            let (id, d) = p.map_or((NO_PIVOT, u64::MAX), |p| (p.id, p.dist));
            out.extend_from_slice(&id.to_le_bytes());
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&(sk.bunch.len() as u32).to_le_bytes());
        for e in &sk.bunch {
            out.extend_from_slice(&e.id.to_le_bytes());
            out.push(e.level);
            out.extend_from_slice(&e.dist.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    b: &'a [u8],
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        if self.b.len() < N {
            return Err(FormatError::Sketch("truncated"));
        }
        let (h, t) = self.b.split_at(N);
        self.b = t;
        Ok(h.try_into().expect("split at N"))
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        self.take::<4>().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        self.take::<8>().map(u64::from_le_bytes)
    }
}

/// Inverse of [`encode_sketches`]. The file carries no certificate; the
/// plain (2k−1) label is filled in.
pub fn decode_sketches(b: &[u8]) -> Result<SketchSet, FormatError> {
    let mut r = Reader { b };
    if &r.take::<4>()? != MAGIC {
        return Err(FormatError::Sketch("bad magic"));
    }
    if u16::from_le_bytes(r.take::<2>()?) != VERSION {
        return Err(FormatError::Sketch("unsupported version"));
    }
    let n = r.u32()? as usize;
    let k = r.u32()?;
    if k == 0 || k > 64 {
        return Err(FormatError::Sketch("bad k"));
    }
    let seed = r.u64()?;
    let mut sketches = Vec::with_capacity(n.min(1 << 20));
    for owner in 0..n {
        let mut pivots = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let id = r.u32()?;
            let dist = r.u64()?;
            pivots.push((id != NO_PIVOT).then_some(Pivot { id, dist }));
        }
        let count = r.u32()? as usize;
        let mut bunch = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let id = r.u32()?;
            let [level] = r.take::<1>()?;
            let dist = r.u64()?;
            bunch.push(BunchEntry { id, level, dist });
        }
        if bunch.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(FormatError::Sketch("bunch not sorted by id"));
        }
        sketches.push(DistanceSketch { owner: owner as VertexId, pivots, bunch });
    }
    if !r.b.is_empty() {
        return Err(FormatError::Sketch("trailing bytes"));
    }
    Ok(SketchSet { k, seed, hop_limit: None, certificate: tz_stretch(k), sketches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tzmpc_core::graph::{generate_graph, GraphKind};
    use tzmpc_core::tz::{build_sketches_centralized, sample_hierarchy};

    #[test]
    fn spec_examples() {
        let g = parse_edge_list("3\n0 1 5\n1 2 2").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert!(matches!(parse_edge_list("3\n0 0 1"), Err(FormatError::Parse { line: 2, .. })));
        assert_eq!(parse_edge_list("2\n0 1 4\n1 0 2\n").unwrap().weight(0, 1), Some(2));
        assert!(matches!(parse_edge_list("2\n# c\n0 1 -4"), Err(FormatError::NegativeWeight { line: 3 })));
        assert!(parse_edge_list("2\n0 1").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_graph(GraphKind::ErdosRenyi, 40, 0.2, 100, 3).unwrap();
        let text = write_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_edge_list(&back), text);
    }

    #[test]
    fn tzsk_round_trip() {
        let g = generate_graph(GraphKind::Grid, 25, 0.0, 9, 1).unwrap();
        let s = build_sketches_centralized(&g, &sample_hierarchy(25, 3, 4).unwrap()).unwrap();
        let bytes = encode_sketches(&s);
        assert_eq!(&bytes[..4], b"TZSK");
        let back = decode_sketches(&bytes).unwrap();
        assert_eq!(back.sketches, s.sketches);
        assert_eq!(encode_sketches(&back), bytes);
        assert!(decode_sketches(&bytes[..bytes.len() - 1]).is_err());
    }
}
