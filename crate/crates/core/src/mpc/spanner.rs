//! Baswana–Sen clustering rounds on the vertex layout. Each round is two
//! depth-1 explorations: the first delivers the lightest edge into every
//! adjacent cluster, the second carries drop decisions and new cluster ids
//! across every alive edge. Decisions use [`crate::spanner::decide`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::bf::{Explorer, Rule, Run, RunReport, NONE};
use super::sim::{SimError, Store};
use super::tuples::TupleRec;
use crate::explore::Entry;
use crate::graph::{Edge, VertexId, Weight};
use crate::spanner::{cluster_sampled, decide, Spanner, NONE as UNCLUSTERED};

/// Record annotations: neighbour's old cluster, own drop, neighbour's drop,
/// neighbour's next cluster.
const NBR_CLUSTER: usize = 0;
const DROPPED: usize = 1;
const NBR_DROPPED: usize = 2;
const NBR_NEXT: usize = 3;

/// Drop marker meaning every adjacent cluster.
const ALL: u64 = u32::MAX as u64;

/// Root state of one vertex during clustering.
#[derive(Default, Debug)]
pub struct Clustering {
    pub cluster: u64,
    next: u64,
    drop: Option<Vec<u32>>,
    pub adds: Vec<(VertexId, Weight)>,
}

impl Store for Clustering {
    fn words(&self) -> u64 {
        4 + self.drop.as_ref().map_or(0, |d| d.len() as u64) + 2 * self.adds.len() as u64
    }
}

struct Lightest;

impl Rule for Lightest {
    fn admit(&self, _: u64, _: u64) -> bool {
        true
    }

    fn receive(&self, _: u64, ann: &mut [u64; 4], key: u64, _: u64, _: u64) -> bool {
        ann[NBR_CLUSTER] = key;
        true
    }
}

struct Exchange;

impl Rule for Exchange {
    fn admit(&self, _: u64, _: u64) -> bool {
        true
    }

    fn push(&self, _: &TupleRec, ann: &mut [u64; 4], alive: bool, thr: u64, chunk: &[u64], last: bool, out: &mut Vec<u64>) {
        for c in chunk.chunks_exact(3) {
            if c[0] == ALL || c[0] == ann[NBR_CLUSTER] {
                ann[DROPPED] = 1;
            }
        }
        if last && alive {
            out.extend([0, ann[DROPPED], thr]);
        }
    }

    fn receive(&self, _: u64, ann: &mut [u64; 4], _: u64, dropped: u64, next: u64) -> bool {
        ann[NBR_DROPPED] = dropped;
        ann[NBR_NEXT] = next;
        false
    }
}

fn encode(c: VertexId) -> u64 {
    if c == UNCLUSTERED { NONE } else { c as u64 }
}

/// Per-round exploration reports of one spanner build.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpannerRuns {
    pub runs: Vec<RunReport>,
}

/// (2t−1)-spanner of the loaded graph; equals [`crate::spanner::build_spanner`]
/// under the same seed. Added edges stay in the roots' `adds`.
pub fn mpc_spanner(ex: &mut Explorer<Clustering>, n: usize, t: u32, seed: u64) -> Result<(Spanner, SpannerRuns), SimError> {
    let t = t.max(1);
    let p = libm::pow(n.max(2) as f64, -1.0 / t as f64);
    let mut runs = SpannerRuns::default();
    ex.at_roots(|v, x, _| {
        x.cluster = v as u64;
        x.adds.clear();
    })?;
    let lightest = |ex: &mut Explorer<Clustering>, runs: &mut SpannerRuns| -> Result<(), SimError> {
        let run = Run { h: 1, cap: usize::MAX, rule: &Lightest, groups: 1, label: "spanner" };
        let (rep, _) = ex.run(&run, |v, x| {
            let seeds = if x.cluster == NONE { Vec::new() } else { alloc::vec![Entry { key: x.cluster as u32, dist: 0, tag: v }] };
            (NONE, seeds)
        })?;
        runs.runs.push(rep);
        Ok(())
    };
    let light_of = |x: &Clustering, table: &[Entry]| -> Vec<(VertexId, Weight, VertexId)> {
        table.iter().filter(|e| e.key as u64 != x.cluster).map(|e| (e.key, e.dist, e.tag)).collect()
    };
    for round in 1..t {
        lightest(ex, &mut runs)?;
        let sampled = |c: VertexId| cluster_sampled(seed, round, c, p);
        ex.at_roots(|_, x, table| {
            if x.cluster == NONE {
                x.next = NONE;
                x.drop = Some(Vec::new());
                return;
            }
            let own = x.cluster as VertexId;
            let d = decide(own, sampled(own), &light_of(x, table), sampled);
            x.adds.extend(d.add);
            x.next = encode(d.cluster);
            x.drop = d.drop;
        })?;
        ex.at_records(|_, _, ann, _| {
            ann[DROPPED] = 0;
            ann[NBR_DROPPED] = 0;
            ann[NBR_NEXT] = NONE;
        })?;
        let run = Run { h: 1, cap: usize::MAX, rule: &Exchange, groups: 1, label: "spanner" };
        let (rep, _) = ex.run(&run, |_, x| {
            let seeds = match &x.drop {
                None => alloc::vec![Entry { key: ALL as u32, dist: 0, tag: 0 }],
                Some(list) => list.iter().map(|&c| Entry { key: c, dist: 0, tag: 0 }).collect(),
            };
            (x.next, seeds)
        })?;
        runs.runs.push(rep);
        ex.at_records(|_, alive, ann, next| {
            let intra = next == ann[NBR_NEXT];
            *alive = *alive
                && ann[DROPPED] == 0
                && ann[NBR_DROPPED] == 0
                && next != NONE
                && ann[NBR_NEXT] != NONE
                && !intra;
        })?;
        ex.at_roots(|_, x, _| x.cluster = x.next)?;
    }
    lightest(ex, &mut runs)?;
    let mut keep: BTreeMap<(VertexId, VertexId), Weight> = BTreeMap::new();
    ex.at_roots(|v, x, table| {
        if x.cluster != NONE {
            let light = light_of(x, table);
            x.adds.extend(light.into_iter().map(|(_, w, y)| (y, w)));
        }
        for &(y, w) in &x.adds {
            keep.insert((v.min(y), v.max(y)), w);
        }
    })?;
    let edges = keep.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
    Ok((Spanner { t, seed, edges }, runs))
}
