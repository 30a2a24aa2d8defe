//! Edge-tuple preprocessing: index every edge within both endpoint
//! neighbourhoods, lay each vertex out on a contiguous machine range and
//! pair mirror records.
//!
//! Vertex `v` owns the range `M(v) = [r_v, r_v + ⌈deg(v)/L⌉]`: a root
//! machine `r_v` for vertex state, then the record machines, record `i`
//! (1-based) on `r_v + 1 + ⌊(i−1)/L⌋`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::scan::{tree_scan, Monoid, Sum};
use super::sim::{MachineId, Sim, SimConfig, SimError, HEADER_WORDS};
use super::sort::{mpc_index, mpc_sort, Items, Record};
use super::tree::{fanout, MachineRange};
use crate::graph::{VertexId, WeightedGraph};
use crate::ratio::Ratio;

/// Marker in `b` for the root record of a vertex.
pub const ROOT: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TupleRec {
    pub a: u64,
    pub b: u64,
    pub w: u64,
    pub i_a: u64,
    pub i_b: u64,
    pub deg_a: u64,
    pub deg_b: u64,
    pub r_a: u64,
    pub r_b: u64,
}

impl TupleRec {
    pub fn edge(a: VertexId, b: VertexId, w: u64) -> TupleRec {
        TupleRec { a: a as u64, b: b as u64, w, ..Default::default() }
    }

    pub fn is_root(&self) -> bool {
        self.b == ROOT
    }

    fn orient(&self) -> u64 {
        (self.a > self.b) as u64
    }
}

impl Record for TupleRec {
    const WORDS: usize = 9;
    fn encode(&self, out: &mut Vec<u64>) {
        out.extend([self.a, self.b, self.w, self.i_a, self.i_b, self.deg_a, self.deg_b, self.r_a, self.r_b]);
    }
    fn decode(w: &[u64]) -> Self {
        TupleRec { a: w[0], b: w[1], w: w[2], i_a: w[3], i_b: w[4], deg_a: w[5], deg_b: w[6], r_a: w[7], r_b: w[8] }
    }
}

/// Per-machine shape of the vertex layout and of the exploration engines,
/// derived from S so that every round fits the I/O budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub s: u64,
    /// Records per record machine.
    pub l: u64,
    /// Fanout of the per-vertex trees.
    pub b: u64,
    /// Fanout of the global barrier tree.
    pub b_g: u64,
    /// Entries per downward chunk.
    pub q_down: u64,
    /// Entries per upward chunk.
    pub q_up: u64,
}

pub const ENTRY_WORDS: u64 = 3;

impl Geometry {
    pub fn new(s: u64) -> Result<Geometry, SimError> {
        let q_down = (s / 256).max(1);
        let push = ENTRY_WORDS * q_down + 3 + HEADER_WORDS;
        let down = ENTRY_WORDS * q_down + 3 + HEADER_WORDS;
        let l = (s / (2 * push)).min(s / 40).max(1);
        let b = (s / (8 * down)).max(2);
        let q_up = ((s / (8 * b)).saturating_sub(2 + HEADER_WORDS) / ENTRY_WORDS).max(1);
        let b_g = (s / 16).max(2);
        let g = Geometry { s, l, b, b_g, q_down, q_up };
        if g.worst_out() > s || g.worst_in() > s || l * (TupleRec::WORDS as u64 + HEADER_WORDS) > s {
            return Err(SimError::Config("S too small for the vertex layout"));
        }
        Ok(g)
    }

    fn chunk_words(&self) -> (u64, u64) {
        (ENTRY_WORDS * self.q_down + 3 + HEADER_WORDS, ENTRY_WORDS * self.q_down + 3 + HEADER_WORDS)
    }

    fn up(&self) -> u64 {
        ENTRY_WORDS * self.q_up + 2 + HEADER_WORDS
    }

    fn control(&self) -> u64 {
        2 + HEADER_WORDS
    }

    /// Words one machine may send in a round of the exploration engine.
    pub fn worst_out(&self) -> u64 {
        let (push, down) = self.chunk_words();
        self.b * down + self.l * push + self.up() + (self.b_g + 1) * self.control()
    }

    pub fn worst_in(&self) -> u64 {
        let (push, down) = self.chunk_words();
        down + self.l * push + self.b * self.up() + (self.b_g + 1) * self.control()
    }

    /// Machines in `M(v)`.
    pub fn span(&self, deg: u64) -> u64 {
        1 + deg.div_ceil(self.l)
    }

    /// Machine (group 0) holding record `i` of a vertex rooted at `r`.
    pub fn record_machine(&self, r: u64, i: u64) -> u64 {
        r + 1 + (i - 1) / self.l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub geometry: Geometry,
    /// Machines used by one copy of the layout.
    pub p0: u64,
    /// Replica groups; group `g` is offset by `g·p0`.
    pub groups: u64,
}

/// Configuration for a graph on the vertex layout: the pool always holds one
/// copy of the layout.
pub fn graph_config(g: &WeightedGraph, gamma: Ratio) -> Result<SimConfig, SimError> {
    let mut c = SimConfig::new(g.n() as u64, g.m() as u64, gamma);
    let geo = Geometry::new(c.words_per_machine())?;
    c.min_machines = 2 * g.n() as u64 + (2 * g.m() as u64).div_ceil(geo.l);
    Ok(c)
}

/// Scatter every undirected edge of `g` as one record, at most S/8 words per
/// machine to leave room for both orientations while sorting.
pub fn load_edges(cfg: SimConfig, g: &WeightedGraph) -> Result<Sim<Items<TupleRec>>, SimError> {
    let mut sim: Sim<Items<TupleRec>> = Sim::new(cfg)?;
    let per = (sim.s() / 8).max(TupleRec::WORDS as u64);
    sim.scatter_input(g.edges().iter().map(|e| TupleRec::edge(e.u, e.v, e.w)), |_| TupleRec::WORDS as u64, Some(per), |st, r| {
        st.items.push(r)
    })?;
    Ok(sim)
}

/// Left/right neighbour summary for pairing mirror records across machine
/// boundaries: (a, b, i_a, deg_a, r_a) of the first and last record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ends {
    first: Option<[u64; 5]>,
    last: Option<[u64; 5]>,
}

fn brief(r: &TupleRec) -> [u64; 5] {
    [r.a, r.b, r.i_a, r.deg_a, r.r_a]
}

impl Monoid for Ends {
    fn identity() -> Self {
        Ends { first: None, last: None }
    }
    fn op(&self, r: &Self) -> Self {
        Ends { first: self.first.or(r.first), last: r.last.or(self.last) }
    }
    fn encode(&self, out: &mut Vec<u64>) {
        for x in [self.first, self.last] {
            match x {
                None => out.push(0),
                Some(v) => {
                    out.push(1);
                    out.extend_from_slice(&v);
                }
            }
        }
    }
    fn decode(w: &[u64]) -> (Self, usize) {
        let mut at = 0;
        let mut read = || {
            if w[at] == 0 {
                at += 1;
                None
            } else {
                let v: [u64; 5] = w[at + 1..at + 6].try_into().unwrap();
                at += 6;
                Some(v)
            }
        };
        let first = read();
        let last = read();
        (Ends { first, last }, at)
    }
}

fn occupied(sim: &Sim<Items<TupleRec>>) -> MachineRange {
    let used = sim.stores().iter().rposition(|st| !st.items.is_empty()).map_or(1, |i| i + 1);
    MachineRange { first: 0, len: used as u32 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LastPair(Option<(u64, u64)>);

impl Monoid for LastPair {
    fn identity() -> Self {
        LastPair(None)
    }
    fn op(&self, r: &Self) -> Self {
        LastPair(r.0.or(self.0))
    }
    fn encode(&self, out: &mut Vec<u64>) {
        match self.0 {
            None => out.extend([0, 0, 0]),
            Some((a, b)) => out.extend([1, a, b]),
        }
    }
    fn decode(w: &[u64]) -> (Self, usize) {
        (LastPair((w[0] == 1).then(|| (w[1], w[2]))), 3)
    }
}

/// Route items to machines `0..`, at most S/8 words each, keeping global
/// order; returns the machines used.
fn balance(sim: &mut Sim<Items<TupleRec>>, label: &str) -> Result<u64, SimError> {
    let p = sim.p();
    let all = MachineRange { first: 0, len: p as u32 };
    let per = (sim.s() / 8 / TupleRec::WORDS as u64).max(1);
    let mut offset = alloc::vec![0u64; p as usize];
    let total = tree_scan(sim, &[all], fanout(sim.s(), 3), |_, st: &Items<TupleRec>| Sum(st.items.len() as u64), |m, _, l, _| offset[m as usize] = l.0, label)?[0].0;
    if total.div_ceil(per) > p {
        return Err(SimError::InsufficientExtraSpace { needed: total.div_ceil(per), available: p });
    }
    sim.run_round(label, |m, st, _, out| {
        let mut per_dest: alloc::collections::BTreeMap<u64, Vec<u64>> = alloc::collections::BTreeMap::new();
        for (j, r) in core::mem::take(&mut st.items).into_iter().enumerate() {
            let dest = (offset[m as usize] + j as u64) / per;
            if dest == m as u64 {
                st.items.push(r);
            } else {
                r.encode(per_dest.entry(dest).or_default());
            }
        }
        for (d, pl) in per_dest {
            out.send(d as MachineId, pl);
        }
    })?;
    sim.local_step(|m, st, mut inbox| {
        inbox.sort_by_key(|msg| msg.src);
        let own = core::mem::take(&mut st.items);
        let mut own = Some(own);
        for msg in inbox {
            if msg.src > m {
                st.items.extend(own.take().into_iter().flatten());
            }
            st.items.extend(msg.payload.chunks_exact(TupleRec::WORDS).map(TupleRec::decode));
        }
        st.items.extend(own.into_iter().flatten());
    })?;
    Ok(total.div_ceil(per))
}

/// Even out raw edges left anywhere on the machines (`a < b` each, possibly
/// repeated) and keep one record per pair with its smallest weight: the
/// items are balanced, sorted by (a, b, w), thinned by a boundary scan and
/// balanced again.
pub fn rescatter(sim: &mut Sim<Items<TupleRec>>, label: &str) -> Result<(), SimError> {
    let used = balance(sim, label)?;
    if used == 0 {
        return Ok(());
    }
    let range = MachineRange { first: 0, len: used as u32 };
    mpc_sort(sim, range, |r| ((r.a as u128) << 96) | ((r.b as u128) << 64) | r.w as u128, label)?;
    tree_scan(
        sim,
        &[range],
        fanout(sim.s(), 7),
        |_, st: &Items<TupleRec>| LastPair(st.items.last().map(|r| (r.a, r.b))),
        |_, st, left, _| {
            let mut prev = left.0;
            st.items.retain(|r| {
                let k = Some((r.a, r.b));
                let keep = k != prev;
                prev = k;
                keep
            });
        },
        label,
    )?;
    balance(sim, label)?;
    Ok(())
}

/// Turn scattered raw edges into complete tuple records on the vertex layout,
/// replicated into `groups` copies (`None`: as many as fit).
pub fn build_edge_tuples(sim: &mut Sim<Items<TupleRec>>, groups: Option<u64>, label: &str) -> Result<Layout, SimError> {
    let geo = Geometry::new(sim.s())?;
    let range = occupied(sim);
    for st in sim.stores_mut() {
        let mirrored: Vec<TupleRec> = st.items.iter().map(|r| TupleRec::edge(r.b as VertexId, r.a as VertexId, r.w)).collect();
        st.items.extend(mirrored);
    }
    mpc_index(sim, range, |r| (r.a as u32, r.b), |r, rank, size| (r.i_a, r.deg_a) = (rank, size), label)?;
    // r_a: machines used by all smaller vertices.
    let contrib = move |r: &TupleRec| if r.i_a == r.deg_a { geo.span(r.deg_a) } else { 0 };
    let b = fanout(sim.s(), 3);
    let p0 = tree_scan(
        sim,
        &[range],
        b,
        |_, st: &Items<TupleRec>| Sum(st.items.iter().map(contrib).sum()),
        |_, st, left, _| {
            let mut run = left.0;
            for r in st.items.iter_mut() {
                r.r_a = run;
                run += contrib(r);
            }
        },
        label,
    )?[0]
        .0;
    let groups = match groups {
        Some(g) => g.max(1),
        None => (sim.p() / p0.max(1)).max(1),
    };
    if groups * p0 > sim.p() {
        return Err(SimError::InsufficientExtraSpace { needed: groups * p0, available: sim.p() });
    }
    // Mirrors become adjacent under (min, max, orientation).
    mpc_sort(sim, range, |r| ((r.a.min(r.b) as u128) << 64) | ((r.a.max(r.b) as u128) << 1) | r.orient() as u128, label)?;
    let b = fanout(sim.s(), 25);
    tree_scan(
        sim,
        &[range],
        b,
        |_, st: &Items<TupleRec>| Ends { first: st.items.first().map(brief), last: st.items.last().map(brief) },
        |_, st, left, right| {
            let n = st.items.len();
            let briefs: Vec<[u64; 5]> = st.items.iter().map(brief).collect();
            for (i, r) in st.items.iter_mut().enumerate() {
                let m = if r.orient() == 0 {
                    if i + 1 < n { Some(briefs[i + 1]) } else { right.first }
                } else if i > 0 {
                    Some(briefs[i - 1])
                } else {
                    left.last
                };
                let m = m.expect("every record has a mirror");
                debug_assert_eq!((m[0], m[1]), (r.b, r.a));
                (r.i_b, r.deg_b, r.r_b) = (m[2], m[3], m[4]);
            }
        },
        label,
    )?;
    // Route records home, plus a root marker per vertex. A machine holding
    // many small destinations drains its queue over several rounds. A queued
    // marker is a flag on its record until it is encoded at send time.
    let marker_cost = |root: bool| if root { 1 } else { TupleRec::WORDS as u64 };
    let mut queues: Vec<VecDeque<(u64, Vec<(TupleRec, bool)>)>> = (0..sim.p()).map(|_| VecDeque::new()).collect();
    sim.local_step(|m, st, _| {
        let items = core::mem::take(&mut st.items);
        let mut per_dest: alloc::collections::BTreeMap<u64, Vec<(TupleRec, bool)>> = alloc::collections::BTreeMap::new();
        for r in items {
            if r.i_a == 1 {
                let root = TupleRec { b: ROOT, ..r };
                if root.r_a == m as u64 {
                    st.items.push(root);
                } else {
                    per_dest.entry(r.r_a).or_default().push((r, true));
                }
            }
            let dest = geo.record_machine(r.r_a, r.i_a);
            if dest == m as u64 {
                st.items.push(r);
            } else {
                per_dest.entry(dest).or_default().push((r, false));
            }
        }
        st.scratch = per_dest.values().flatten().map(|&(_, root)| marker_cost(root)).sum();
        queues[m as usize].extend(per_dest);
    })?;
    let s = sim.s();
    while queues.iter().any(|q| !q.is_empty()) {
        sim.run_round(label, |m, st, inbox, out| {
            for msg in inbox {
                for c in msg.payload.chunks_exact(TupleRec::WORDS) {
                    st.items.push(TupleRec::decode(c));
                }
            }
            let q = &mut queues[m as usize];
            while let Some((d, recs)) = q.front() {
                let len = (recs.len() * TupleRec::WORDS) as u64;
                if out.words() + len + HEADER_WORDS > s {
                    break;
                }
                let mut pl = Vec::with_capacity(len as usize);
                for &(r, root) in recs {
                    let r = if root { TupleRec { b: ROOT, ..r } } else { r };
                    r.encode(&mut pl);
                    st.scratch -= marker_cost(root);
                }
                out.send(*d as MachineId, pl);
                q.pop_front();
            }
        })?;
    }
    sim.local_step(|_, st, inbox| {
        for msg in inbox {
            for c in msg.payload.chunks_exact(TupleRec::WORDS) {
                st.items.push(TupleRec::decode(c));
            }
        }
        st.items.sort_unstable_by_key(|r| (r.is_root(), r.i_a));
    })?;
    // Replicate by doubling.
    let mut have = 1u64;
    while have < groups {
        let step = have;
        sim.run_round(label, |m, st, _, out| {
            let m = m as u64;
            if m < step * p0 && m + step * p0 < groups * p0 && !st.items.is_empty() {
                let mut pl = Vec::with_capacity(st.items.len() * TupleRec::WORDS);
                for r in &st.items {
                    r.encode(&mut pl);
                }
                out.send((m + step * p0) as MachineId, pl);
            }
        })?;
        sim.local_step(|_, st, inbox| {
            for msg in inbox {
                for c in msg.payload.chunks_exact(TupleRec::WORDS) {
                    st.items.push(TupleRec::decode(c));
                }
            }
        })?;
        have *= 2;
    }
    Ok(Layout { geometry: geo, p0, groups })
}
