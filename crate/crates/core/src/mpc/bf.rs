//! Hop-limited keyed Bellman-Ford on the vertex layout.
//!
//! Every iteration is self-timed: the root of `v` streams the entries that
//! changed down `M(v)` in chunks, each record machine pushes them across its
//! edges to the mirror machines, candidates are filtered and min-merged on
//! the way back up to the receiving root, and every link closes with a
//! `last` flag so no machine waits on a fixed schedule. A global tree then
//! agrees on whether anything changed. Sources are striped over the replica
//! groups by key, so with extra space many sources advance at once.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::sim::{MachineId, Message, Outbox, Sim, SimError, Store};
use super::sort::{Items, Record};
use super::sim::SimConfig;
use super::tuples::{build_edge_tuples, load_edges, rescatter, Geometry, Layout, TupleRec, ENTRY_WORDS};
use crate::explore::{improve, CapExceeded, Entry};
use crate::graph::{Distance, VertexId, Weight, WeightedGraph};

pub const NONE: u64 = u64::MAX;

const DOWN: u64 = 1;
const PUSH: u64 = 2;
const UP: u64 = 3;
const REPORT: u64 = 4;
const STOP: u64 = 6;
const SEED: u64 = 7;
const SIZE: u64 = 8;
const VERDICT: u64 = 9;
const GATHER: u64 = 10;

fn hdr(kind: u64, iter: u64) -> u64 {
    kind | (iter << 4)
}

fn kind(w: u64) -> (u64, u64) {
    (w & 15, w >> 4)
}

/// Per-vertex data a pipeline keeps at the vertex's root in group 0.
pub trait VertexData: Store + Default {}
impl<T: Store + Default> VertexData for T {}

impl Store for () {
    fn words(&self) -> u64 {
        0
    }
}

#[derive(Default, Debug, Clone, Copy)]
struct Agg {
    reports: u64,
    changed: bool,
    cap: Option<(u64, u64)>,
}

impl Agg {
    fn add(&mut self, changed: bool, cap: Option<(u64, u64)>) {
        self.changed |= changed;
        self.cap = match (self.cap, cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Default, Debug)]
struct RunState {
    iter: u64,
    live: bool,
    stopped: bool,
    thr: u64,
    has_thr: bool,
    table: Vec<Entry>,
    delta: Vec<Entry>,
    cand: BTreeMap<u32, (u64, u32)>,
    /// Pushes of the next iteration; neighbours run at most one ahead.
    cand_next: BTreeMap<u32, (u64, u32)>,
    in_next: u64,
    pending: VecDeque<Message>,
    down: VecDeque<Vec<u64>>,
    down_done: bool,
    in_done: u64,
    kids_done: u64,
    up: Option<VecDeque<Vec<u64>>>,
    local_done: bool,
    done_upto: u64,
    reported_upto: u64,
    agg: BTreeMap<u64, Agg>,
    /// Set at a root whose table outgrew the cap; the table then freezes.
    cap: Option<(u64, u64)>,
    verdict: Option<(u64, u64)>,
    changed_iters: u64,
}

impl RunState {
    fn words(&self) -> u64 {
        let q: u64 = self.down.iter().chain(self.up.iter().flatten()).map(|c| c.len() as u64).sum();
        let p: u64 = self.pending.iter().map(|m| m.words()).sum();
        8 + ENTRY_WORDS * (self.table.len() + self.delta.len() + self.cand.len() + self.cand_next.len()) as u64 + 4 * self.agg.len() as u64 + q + p
    }
}

/// Machine state for explorations.
#[derive(Default, Debug)]
pub struct Node<X> {
    /// Vertex owning this machine, `NONE` when idle.
    pub vertex: u64,
    pub root: bool,
    pub group: u64,
    /// Position within `M(v)`.
    t: u64,
    span: u64,
    base: u64,
    pub records: Vec<TupleRec>,
    /// Machines holding the mirrors of `records`, per record.
    mirror: Vec<u64>,
    /// Records still present in the explored graph.
    pub alive: Vec<bool>,
    /// Per-record scratch for rules.
    pub ann: Vec<[u64; 4]>,
    links: u64,
    pub data: X,
    run: RunState,
}

impl<X: Store> Store for Node<X> {
    fn words(&self) -> u64 {
        8 + (TupleRec::WORDS as u64 + 6) * self.records.len() as u64 + self.data.words() + self.run.words()
    }
    fn active(&self) -> bool {
        self.run.live && !self.run.stopped
    }
}

impl<X> Node<X> {
    /// Final table of a root in group 0 after [`Explorer::run`].
    pub fn table(&self) -> &[Entry] {
        &self.run.table
    }

    /// Threshold of the vertex in the last run, as seen on this machine.
    pub fn thr(&self) -> u64 {
        self.run.thr
    }

    pub fn take_table(&mut self) -> Vec<Entry> {
        core::mem::take(&mut self.run.table)
    }

    fn parent(&self, b: u64) -> u64 {
        self.base + if self.t < b { 0 } else { self.t / b }
    }
}

fn heap_kids(t: u64, len: u64, b: u64) -> u64 {
    let (lo, hi) = if t == 0 { (1, b) } else { (t * b, t * b + b) };
    hi.min(len).saturating_sub(lo)
}

fn heap_children(t: u64, len: u64, b: u64) -> core::ops::Range<u64> {
    let (lo, hi) = if t == 0 { (1, b) } else { (t * b, t * b + b) };
    lo.min(len)..hi.min(len)
}

/// What crosses an edge. The default relaxes: every streamed entry travels
/// over alive records with the edge weight added, and the receiving vertex
/// admits it by `admit(thr, d)` against its own threshold.
pub trait Rule {
    fn admit(&self, thr: u64, d: u64) -> bool;

    /// Words pushed over `rec` for one streamed chunk of `(key, dist, tag)`
    /// triples; `thr` is the sending vertex's threshold.
    #[allow(clippy::too_many_arguments)]
    fn push(&self, rec: &TupleRec, ann: &mut [u64; 4], alive: bool, thr: u64, chunk: &[u64], last: bool, out: &mut Vec<u64>) {
        let _ = (ann, thr, last);
        if alive {
            for c in chunk.chunks_exact(3) {
                out.extend([c[0], c[1] + rec.w, c[2]]);
            }
        }
    }

    /// A pushed triple arriving at the mirror record; true forwards it as a
    /// candidate for the receiving vertex.
    fn receive(&self, thr: u64, ann: &mut [u64; 4], key: u64, dist: u64, tag: u64) -> bool {
        let _ = (ann, key, tag);
        self.admit(thr, dist)
    }
}

pub struct Relax<F>(pub F);

impl<F: Fn(u64, u64) -> bool> Rule for Relax<F> {
    fn admit(&self, thr: u64, d: u64) -> bool {
        (self.0)(thr, d)
    }
}

/// Per-run parameters.
pub struct Run<'a> {
    pub h: u64,
    pub cap: usize,
    pub rule: &'a dyn Rule,
    /// Replica groups to stripe keys over (at most the layout's).
    pub groups: u64,
    pub label: &'a str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunReport {
    /// Iterations that changed at least one entry.
    pub iterations: u64,
    pub rounds: u64,
}

/// An exploration-ready simulator over a fixed layout.
pub struct Explorer<X> {
    pub sim: Sim<Node<X>>,
    pub layout: Layout,
}

impl<X: VertexData> Explorer<X> {
    /// Re-type a tuple layout into exploration nodes.
    pub fn new(sim: Sim<Items<TupleRec>>, layout: Layout) -> Result<Explorer<X>, SimError> {
        let geo = layout.geometry;
        let p0 = layout.p0;
        let used = layout.groups * p0;
        let mut sim = sim.map_stores(|m, st| {
            let mut node = Node::<X> { vertex: NONE, ..Default::default() };
            let m = m as u64;
            if m >= used {
                return node;
            }
            node.group = m / p0;
            let off = node.group * p0;
            for r in st.items {
                node.vertex = r.a;
                node.base = r.r_a + off;
                node.t = m - off - r.r_a;
                node.span = geo.span(r.deg_a);
                if r.is_root() {
                    node.root = true;
                } else {
                    node.mirror.push(geo.record_machine(r.r_b, r.i_b) + off);
                    node.records.push(r);
                    node.alive.push(true);
                    node.ann.push([0; 4]);
                }
            }
            let mut d = node.mirror.clone();
            d.sort_unstable();
            d.dedup();
            node.links = d.len() as u64;
            node
        });
        sim.local_step(|_, _, _| {})?;
        Ok(Explorer { sim, layout })
    }

    /// Load `g`, build its tuples and re-type them.
    pub fn build(cfg: SimConfig, g: &WeightedGraph, groups: Option<u64>, label: &str) -> Result<Explorer<X>, SimError> {
        let mut sim = load_edges(cfg, g)?;
        let layout = build_edge_tuples(&mut sim, groups, label)?;
        Explorer::new(sim, layout)
    }

    /// New layout over the alive records (when `keep`) plus the edges `extra`
    /// yields at each group-0 root, rebuilt in place on the same machines.
    pub fn rebuild<Y: VertexData>(
        self,
        keep: bool,
        mut extra: impl FnMut(VertexId, &X) -> Vec<(VertexId, Weight)>,
        groups: Option<u64>,
        label: &str,
    ) -> Result<Explorer<Y>, SimError> {
        let mut sim = self.sim.map_stores(|_, st| {
            let mut items = Items::default();
            if st.group != 0 || st.vertex == NONE {
                return items;
            }
            if keep {
                for (r, &a) in st.records.iter().zip(&st.alive) {
                    if a && r.a < r.b {
                        items.items.push(TupleRec::edge(r.a as VertexId, r.b as VertexId, r.w));
                    }
                }
            }
            if st.root {
                let v = st.vertex as VertexId;
                for (y, w) in extra(v, &st.data) {
                    items.items.push(TupleRec::edge(v.min(y), v.max(y), w));
                }
            }
            items
        });
        rescatter(&mut sim, label)?;
        let mut layout = build_edge_tuples(&mut sim, groups, label)?;
        if self.layout.geometry.q_down == 1 {
            layout.geometry.q_down = 1;
        }
        Explorer::new(sim, layout)
    }

    /// Same layout with fresh per-vertex data.
    pub fn retype<Y: VertexData>(self) -> Explorer<Y> {
        let sim = self.sim.map_stores(|_, st| Node {
            vertex: st.vertex,
            root: st.root,
            group: st.group,
            t: st.t,
            span: st.span,
            base: st.base,
            records: st.records,
            mirror: st.mirror,
            alive: st.alive,
            ann: st.ann,
            links: st.links,
            data: Y::default(),
            run: RunState::default(),
        });
        Explorer { sim, layout: self.layout }
    }

    pub fn geometry(&self) -> Geometry {
        self.layout.geometry
    }

    /// Group-0 root machine of every vertex.
    pub fn roots(&self) -> Vec<MachineId> {
        let mut r = Vec::new();
        for (m, st) in self.sim.stores().iter().enumerate() {
            if st.root && st.group == 0 {
                let v = st.vertex as usize;
                if r.len() <= v {
                    r.resize(v + 1, MachineId::MAX);
                }
                r[v] = m as MachineId;
            }
        }
        r
    }

    /// Stream one entry per chunk, so concurrent sources are pipelined
    /// round-robin instead of advancing together.
    pub fn narrow(&mut self) {
        self.layout.geometry.q_down = 1;
    }

    /// Local computation on every group-0 record with its vertex's threshold
    /// from the last run.
    pub fn at_records(&mut self, mut f: impl FnMut(&TupleRec, &mut bool, &mut [u64; 4], u64)) -> Result<(), SimError> {
        self.sim.local_step(|_, st, _| {
            if st.group != 0 {
                return;
            }
            let thr = st.run.thr;
            for ((r, a), ann) in st.records.iter().zip(st.alive.iter_mut()).zip(st.ann.iter_mut()) {
                f(r, a, ann, thr);
            }
        })
    }

    /// Local computation on every group-0 root.
    pub fn at_roots(&mut self, mut f: impl FnMut(VertexId, &mut X, &[Entry])) -> Result<(), SimError> {
        self.sim.local_step(|_, st, _| {
            if st.root && st.group == 0 {
                f(st.vertex as VertexId, &mut st.data, &st.run.table);
            }
        })
    }

    /// One exploration. `seed(v, data)` runs at the group-0 root of `v` and
    /// returns its threshold and initial entries.
    pub fn run(
        &mut self,
        run: &Run<'_>,
        mut seed: impl FnMut(VertexId, &X) -> (u64, Vec<Entry>),
    ) -> Result<(RunReport, Option<CapExceeded>), SimError> {
        let start = self.sim.rounds();
        let gu = run.groups.clamp(1, self.layout.groups);
        let p0 = self.layout.p0;
        let used = gu * p0;
        let geo = self.layout.geometry;
        let cap = run.cap;
        let rule = run.rule;
        // Seed group-0 roots and hand other groups their keys.
        self.sim.local_step(|m, st, _| {
            st.run = RunState::default();
            if (m as u64) >= used || st.vertex == NONE {
                return;
            }
            st.run.live = true;
            if !(st.root && st.group == 0) {
                return;
            }
            let (thr, seeds) = seed(st.vertex as VertexId, &st.data);
            st.run.thr = thr;
            st.run.has_thr = true;
            for e in seeds {
                if rule.admit(thr, e.dist) {
                    improve(&mut st.run.table, e);
                }
            }
            if gu > 1 {
                let mut keep = Vec::new();
                let mut per: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
                for e in core::mem::take(&mut st.run.table) {
                    let g = e.key as u64 % gu;
                    if g == 0 {
                        keep.push(e);
                    } else {
                        per.entry(g).or_insert_with(|| alloc::vec![hdr(SEED, 0), thr]).extend([e.key as u64, e.dist, e.tag as u64]);
                    }
                }
                st.run.table = keep;
                for g in 1..gu {
                    let pl = per.remove(&g).unwrap_or_else(|| alloc::vec![hdr(SEED, 0), thr]);
                    st.run.pending.push_back(Message { src: (g * p0 + m as u64) as MachineId, payload: pl });
                }
            }
        })?;
        if gu > 1 {
            self.sim.run_round(run.label, |_, st, _, out| {
                for msg in core::mem::take(&mut st.run.pending) {
                    out.send(msg.src, msg.payload);
                }
            })?;
            self.sim.local_step(|_, st, inbox| {
                for msg in inbox {
                    st.run.thr = msg.payload[1];
                    st.run.has_thr = true;
                    for c in msg.payload[2..].chunks_exact(3) {
                        improve(&mut st.run.table, Entry { key: c[0] as u32, dist: c[1], tag: c[2] as u32 });
                    }
                }
            })?;
        }
        self.sim.local_step(|_, st, _| {
            if !st.run.live {
                return;
            }
            if st.root {
                st.run.delta = st.run.table.clone();
                if st.run.table.len() > cap {
                    st.run.cap = Some((st.vertex, st.run.table.len() as u64));
                }
            }
            if run.h == 0 {
                st.run.stopped = true;
            } else {
                begin(st, 1, &geo);
            }
        })?;
        let mut verdict = None;
        if run.h > 0 {
            loop {
                let tr = self.sim.run_round_sparse(run.label, |m, st, inbox, out| step(m as u64, st, inbox, out, &geo, used, run))?;
                let all_stopped = self.sim.stores()[..used as usize].iter().all(|st| !st.run.live || st.run.stopped);
                if all_stopped && !self.sim.pending_messages() {
                    break;
                }
                if tr.messages == 0 && !self.sim.pending_messages() {
                    return Err(SimError::Config("exploration stalled"));
                }
            }
            let zero = &self.sim.stores()[0].run;
            if let Some((v, n)) = zero.verdict {
                verdict = Some(CapExceeded { vertex: v as VertexId, admitted: n as usize, cap });
            }
        } else if let Some(st) = self.sim.stores()[..used as usize].iter().find(|st| st.run.cap.is_some()) {
            let (v, n) = st.run.cap.unwrap();
            verdict = Some(CapExceeded { vertex: v as VertexId, admitted: n as usize, cap });
        }
        let iterations = self.sim.stores()[0].run.changed_iters;
        if verdict.is_none() && gu > 1 {
            verdict = self.gather(gu, cap, run.label)?;
        }
        Ok((RunReport { iterations, rounds: self.sim.rounds() - start }, verdict))
    }

    /// Collect striped tables at the group-0 roots, checking the key cap on
    /// the union first.
    fn gather(&mut self, gu: u64, cap: usize, label: &str) -> Result<Option<CapExceeded>, SimError> {
        let p0 = self.layout.p0;
        let lead = |m: u64| (m % p0) as MachineId;
        self.sim.run_round(label, |m, st, _, out| {
            let m = m as u64;
            if st.root && st.group > 0 && st.group < gu {
                out.send(lead(m), alloc::vec![hdr(SIZE, 0), st.run.table.len() as u64]);
            }
        })?;
        let mut over = None;
        self.sim.run_round(label, |m, st, inbox, out| {
            if !(st.root && st.group == 0) || gu <= 1 {
                return;
            }
            let total = st.run.table.len() as u64 + inbox.iter().map(|x| x.payload[1]).sum::<u64>();
            let ok = total <= cap as u64;
            if !ok && over.is_none() {
                over = Some(CapExceeded { vertex: st.vertex as VertexId, admitted: total as usize, cap });
            }
            for g in 1..gu {
                out.send((g * p0 + m as u64) as MachineId, alloc::vec![hdr(VERDICT, 0), ok as u64]);
            }
        })?;
        self.sim.run_round(label, |m, st, inbox, out| {
            if inbox.first().is_some_and(|x| x.payload[1] == 1) {
                let mut pl = alloc::vec![hdr(GATHER, 0)];
                for e in core::mem::take(&mut st.run.table) {
                    pl.extend([e.key as u64, e.dist, e.tag as u64]);
                }
                out.send(lead(m as u64), pl);
            }
        })?;
        self.sim.local_step(|_, st, inbox| {
            for msg in inbox {
                for c in msg.payload[1..].chunks_exact(3) {
                    improve(&mut st.run.table, Entry { key: c[0] as u32, dist: c[1], tag: c[2] as u32 });
                }
            }
        })?;
        Ok(over)
    }
}

/// Enter iteration `iter`.
fn begin<X>(st: &mut Node<X>, iter: u64, geo: &Geometry) {
    let r = &mut st.run;
    r.iter = iter;
    r.down_done = false;
    r.cand = core::mem::take(&mut r.cand_next);
    r.in_done = core::mem::take(&mut r.in_next);
    r.kids_done = 0;
    r.up = None;
    r.local_done = false;
    if st.root {
        let delta = core::mem::take(&mut r.delta);
        let q = geo.q_down as usize;
        let n = delta.len().div_ceil(q).max(1);
        for i in 0..n {
            let part = &delta[(i * q).min(delta.len())..((i + 1) * q).min(delta.len())];
            let mut c = alloc::vec![hdr(DOWN, iter), (i + 1 == n) as u64, r.thr];
            for e in part {
                c.extend([e.key as u64, e.dist, e.tag as u64]);
            }
            r.down.push_back(c);
        }
    }
}

fn merge(cand: &mut BTreeMap<u32, (u64, u32)>, key: u32, d: u64, tag: u32) {
    cand.entry(key).and_modify(|x| *x = (*x).min((d, tag))).or_insert((d, tag));
}

fn global_parent(m: u64, b: u64) -> u64 {
    if m < b { 0 } else { m / b }
}

fn broadcast_stop<X>(m: u64, st: &mut Node<X>, out: &mut Outbox, used: u64, geo: &Geometry, iter: u64) {
    for c in heap_children(m, used, geo.b_g) {
        out.send(c as MachineId, alloc::vec![hdr(STOP, iter)]);
    }
    st.run.stopped = true;
}

/// One round of one machine. Iterations advance under a local synchronizer:
/// a machine moves on as soon as its own part of an iteration is complete,
/// and messages of later iterations wait in `pending`. Change detection runs
/// behind on the global tree; once an iteration changes nothing every later
/// one is empty, so running ahead is harmless.
fn step<X>(m: u64, st: &mut Node<X>, inbox: Vec<Message>, out: &mut Outbox, geo: &Geometry, used: u64, run: &Run<'_>) {
    if !st.run.live || st.run.stopped {
        return;
    }
    st.run.pending.extend(inbox);
    let b = geo.b;
    let kids = heap_kids(st.t, st.span, b);
    let gkids = heap_kids(m, used, geo.b_g);
    let parent = st.parent(b);
    let (mut took_down, mut sent_down, mut sent_up) = (false, false, false);
    loop {
        let mut progress = false;
        let mut keep = VecDeque::new();
        while let Some(msg) = st.run.pending.pop_front() {
            let (k, it) = kind(msg.payload[0]);
            let r = &mut st.run;
            let now = it == r.iter && !r.local_done;
            match k {
                STOP => {
                    broadcast_stop(m, st, out, used, geo, it);
                    return;
                }
                DOWN if now && !took_down => {
                    took_down = true;
                    r.thr = msg.payload[2];
                    r.has_thr = true;
                    let last = msg.payload[1] == 1;
                    for c in heap_children(st.t, st.span, b) {
                        out.send((st.base + c) as MachineId, msg.payload.clone());
                    }
                    for (j, rec) in st.records.iter().enumerate() {
                        let slot = (rec.i_b - 1) % geo.l;
                        let mut pl = alloc::vec![hdr(PUSH, it), last as u64, slot];
                        run.rule.push(rec, &mut st.ann[j], st.alive[j], r.thr, &msg.payload[3..], last, &mut pl);
                        if last || pl.len() > 3 {
                            out.send(st.mirror[j] as MachineId, pl);
                        }
                    }
                    r.down_done = last;
                    progress = true;
                }
                PUSH if r.has_thr && (now || it == r.iter + 1) => {
                    let (cand, count) = if now { (&mut r.cand, &mut r.in_done) } else { (&mut r.cand_next, &mut r.in_next) };
                    let ann = &mut st.ann[msg.payload[2] as usize];
                    for c in msg.payload[3..].chunks_exact(3) {
                        if run.rule.receive(r.thr, ann, c[0], c[1], c[2]) {
                            merge(cand, c[0] as u32, c[1], c[2] as u32);
                        }
                    }
                    *count += msg.payload[1];
                    progress = true;
                }
                UP if now => {
                    for c in msg.payload[2..].chunks_exact(3) {
                        merge(&mut r.cand, c[0] as u32, c[1], c[2] as u32);
                    }
                    r.kids_done += msg.payload[1];
                    progress = true;
                }
                REPORT => {
                    let w = msg.payload[1];
                    let cap = (w >> 1 != 0).then(|| ((w >> 33) - 1, (w >> 1) & 0xffff_ffff));
                    let a = r.agg.entry(it).or_default();
                    a.reports += 1;
                    a.add(w & 1 == 1, cap);
                    progress = true;
                }
                _ => keep.push_back(msg),
            }
        }
        st.run.pending = keep;
        let r = &mut st.run;
        if st.root && !r.down_done && !sent_down {
            if let Some(c) = r.down.pop_front() {
                for k in heap_children(0, st.span, b) {
                    out.send((st.base + k) as MachineId, c.clone());
                }
                sent_down = true;
                r.down_done = r.down.is_empty();
                progress = true;
            }
        }
        if !r.local_done && r.up.is_none() && r.down_done && r.in_done == st.links && r.kids_done == kids {
            if st.root {
                for (key, (dist, tag)) in core::mem::take(&mut r.cand) {
                    let e = Entry { key, dist, tag };
                    if r.cap.is_none() && improve(&mut r.table, e) {
                        r.delta.push(e);
                    }
                }
                if r.cap.is_none() && r.table.len() > run.cap {
                    r.cap = Some((st.vertex, r.table.len() as u64));
                }
                r.local_done = true;
            } else {
                let q = geo.q_up as usize;
                let all: Vec<(u32, (u64, u32))> = core::mem::take(&mut r.cand).into_iter().collect();
                let n = all.len().div_ceil(q).max(1);
                let mut up = VecDeque::new();
                for i in 0..n {
                    let mut c = alloc::vec![hdr(UP, r.iter), (i + 1 == n) as u64];
                    for &(key, (d, tag)) in &all[(i * q).min(all.len())..((i + 1) * q).min(all.len())] {
                        c.extend([key as u64, d, tag as u64]);
                    }
                    up.push_back(c);
                }
                r.up = Some(up);
            }
            progress = true;
        }
        if !sent_up {
            if let Some(up) = r.up.as_mut() {
                if let Some(c) = up.pop_front() {
                    out.send(parent as MachineId, c);
                    sent_up = true;
                    if up.is_empty() {
                        r.up = None;
                        r.local_done = true;
                    }
                    progress = true;
                }
            }
        }
        if r.local_done && r.done_upto < r.iter {
            let t = r.iter;
            r.done_upto = t;
            let changed = st.root && !r.delta.is_empty();
            r.agg.entry(t).or_default().add(changed, r.cap);
            if t < run.h {
                begin(st, t + 1, geo);
                took_down = false;
            }
            progress = true;
        }
        // Report every completed iteration whose subtree has reported.
        loop {
            let r = &mut st.run;
            let t = r.reported_upto + 1;
            if t > r.done_upto {
                break;
            }
            let a = r.agg.get(&t).copied().unwrap_or_default();
            if a.reports < gkids {
                break;
            }
            r.agg.remove(&t);
            r.reported_upto = t;
            if m == 0 {
                if a.changed {
                    r.changed_iters += 1;
                }
                if a.cap.is_some() {
                    r.verdict = a.cap;
                }
                if a.cap.is_some() || (!a.changed && t < run.h) {
                    broadcast_stop(m, st, out, used, geo, t);
                    return;
                }
                if t == run.h {
                    r.stopped = true;
                    return;
                }
            } else {
                // changed | count << 1 | (vertex + 1) << 33
                let w = a.changed as u64 | a.cap.map_or(0, |(v, n)| (n.min(0xffff_ffff) << 1) | ((v + 1) << 33));
                out.send(global_parent(m, geo.b_g) as MachineId, alloc::vec![hdr(REPORT, t), w]);
                if t == run.h {
                    r.stopped = true;
                    return;
                }
            }
            progress = true;
        }
        if !progress {
            break;
        }
    }
}

/// h-hop distances from every source: `out[i][v] = d^h(sources[i], v)`.
/// Sources run as keys of one exploration, striped over `groups` replicas.
pub fn mpc_restricted_bf<X: VertexData>(
    ex: &mut Explorer<X>,
    sources: &[VertexId],
    h: u64,
    groups: u64,
    label: &str,
) -> Result<(Vec<Vec<Distance>>, RunReport), SimError> {
    let n = ex.roots().len();
    if sources.iter().any(|&s| s as usize >= n) {
        return Err(SimError::Config("source outside the graph"));
    }
    let mut keys: Vec<VertexId> = sources.to_vec();
    keys.sort_unstable();
    keys.dedup();
    let rule = Relax(|_: u64, _: u64| true);
    let run = Run { h, cap: keys.len().max(1), rule: &rule, groups, label };
    let (rep, over) = ex.run(&run, |v, _| {
        let seeds = if keys.binary_search(&v).is_ok() { alloc::vec![Entry { key: v, dist: 0, tag: v }] } else { Vec::new() };
        (NONE, seeds)
    })?;
    debug_assert!(over.is_none(), "cap covers every source");
    let mut by_key = alloc::vec![alloc::vec![Distance::Unreachable; n]; keys.len()];
    ex.at_roots(|v, _, table| {
        for e in table {
            if let Ok(i) = keys.binary_search(&e.key) {
                by_key[i][v as usize] = Distance::Finite(e.dist);
            }
        }
    })?;
    let out = sources.iter().map(|s| by_key[keys.binary_search(s).expect("deduped key")].clone()).collect();
    Ok((out, rep))
}
