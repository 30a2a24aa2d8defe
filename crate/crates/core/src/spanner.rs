//! Baswana–Sen (2t−1)-spanners: t−1 rounds of cluster sampling, then a
//! final inter-cluster patching round.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coin;
use crate::graph::{oracle, Edge, VertexId, Weight, WeightedGraph, INF};
use crate::ratio::Ratio;

pub const NONE: VertexId = VertexId::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spanner {
    pub t: u32,
    pub seed: u64,
    /// Sorted, each with `u < v`.
    pub edges: Vec<Edge>,
}

impl Spanner {
    pub fn graph(&self, n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, self.edges.iter().map(|e| (e.u, e.v, e.w))).expect("spanner edges are valid")
    }

    pub fn stretch(&self) -> Ratio {
        Ratio::integer(2 * self.t as u64 - 1)
    }
}

pub fn cluster_sampled(seed: u64, round: u32, center: VertexId, p: f64) -> bool {
    coin::bernoulli(seed, coin::stream::SPANNER + round as u64, center as u64, p)
}

/// What one vertex does in one clustering round, decided from the lightest
/// edge to each adjacent cluster. Shared by every executor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundDecision {
    /// New cluster, or [`NONE`] when the vertex leaves the clustering.
    pub cluster: VertexId,
    /// Edges to add, as (neighbour, weight).
    pub add: Vec<(VertexId, Weight)>,
    /// Adjacent clusters whose edges are discarded; `None` means all.
    pub drop: Option<Vec<VertexId>>,
}

/// `lightest` holds (cluster, weight, neighbour) for each adjacent cluster,
/// sorted by cluster, lightest by (weight, neighbour).
pub fn decide(own: VertexId, own_sampled: bool, lightest: &[(VertexId, Weight, VertexId)], is_sampled: impl Fn(VertexId) -> bool) -> RoundDecision {
    if own_sampled {
        return RoundDecision { cluster: own, add: Vec::new(), drop: Some(Vec::new()) };
    }
    let best = lightest.iter().filter(|c| is_sampled(c.0)).min_by_key(|c| (c.1, c.0));
    match best {
        None => RoundDecision {
            cluster: NONE,
            add: lightest.iter().map(|c| (c.2, c.1)).collect(),
            drop: None,
        },
        Some(&(cs, ws, xs)) => {
            let mut add = alloc::vec![(xs, ws)];
            let mut drop = alloc::vec![cs];
            for &(c, w, x) in lightest {
                if (w, c) < (ws, cs) {
                    add.push((x, w));
                    drop.push(c);
                }
            }
            drop.sort_unstable();
            RoundDecision { cluster: cs, add, drop: Some(drop) }
        }
    }
}

/// Lightest edge per adjacent cluster for `v` over alive edges.
pub fn lightest_per_cluster(alive: &[(VertexId, Weight)], cluster: &[VertexId]) -> Vec<(VertexId, Weight, VertexId)> {
    let mut best: BTreeMap<VertexId, (Weight, VertexId)> = BTreeMap::new();
    for &(x, w) in alive {
        let c = cluster[x as usize];
        if c == NONE {
            continue;
        }
        best.entry(c).and_modify(|b| *b = (*b).min((w, x))).or_insert((w, x));
    }
    best.into_iter().map(|(c, (w, x))| (c, w, x)).collect()
}

pub fn build_spanner(g: &WeightedGraph, t: u32, seed: u64) -> Spanner {
    let n = g.n();
    let t = t.max(1);
    let p = libm::pow(n.max(2) as f64, -1.0 / t as f64);
    let mut cluster: Vec<VertexId> = (0..n as VertexId).collect();
    let mut alive: Vec<Vec<(VertexId, Weight)>> = (0..n as VertexId).map(|v| g.neighbors(v).to_vec()).collect();
    let mut keep: BTreeMap<(VertexId, VertexId), Weight> = BTreeMap::new();
    let add = |keep: &mut BTreeMap<(VertexId, VertexId), Weight>, a: VertexId, b: VertexId, w: Weight| {
        keep.insert((a.min(b), a.max(b)), w);
    };
    for round in 1..t {
        let sampled_center = |c: VertexId| cluster_sampled(seed, round, c, p);
        let mut next = alloc::vec![NONE; n];
        let mut drops: Vec<Option<Vec<VertexId>>> = alloc::vec![Some(Vec::new()); n];
        for v in 0..n {
            let own = cluster[v];
            if own == NONE {
                continue;
            }
            let light = lightest_per_cluster(&alive[v], &cluster);
            let d = decide(own, sampled_center(own), &light, sampled_center);
            for &(x, w) in &d.add {
                add(&mut keep, v as VertexId, x, w);
            }
            next[v] = d.cluster;
            drops[v] = d.drop;
        }
        // An edge dies if either endpoint drops it or it became intra-cluster.
        let old = cluster;
        for v in 0..n {
            let dv = &drops[v];
            alive[v].retain(|&(x, _)| {
                let hit = |d: &Option<Vec<VertexId>>, c: VertexId| match d {
                    None => true,
                    Some(list) => list.binary_search(&c).is_ok(),
                };
                let removed = hit(dv, old[x as usize]) || hit(&drops[x as usize], old[v]);
                let intra = next[v] != NONE && next[v] == next[x as usize];
                !removed && !intra && next[v] != NONE && next[x as usize] != NONE
            });
        }
        cluster = next;
    }
    for v in 0..n {
        if cluster[v] == NONE {
            continue;
        }
        for (_, w, x) in lightest_per_cluster(&alive[v], &cluster) {
            add(&mut keep, v as VertexId, x, w);
        }
    }
    let edges = keep.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
    Spanner { t, seed, edges }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpannerReport {
    /// Largest d_sp/d_g over checked pairs, exact.
    pub max_ratio: Ratio,
    pub worst_pair: Option<(VertexId, VertexId)>,
    pub subset: bool,
    pub passed: bool,
}

/// Exhaustive when `sources` is `None`.
pub fn verify_spanner(g: &WeightedGraph, sp: &Spanner, sources: Option<&[VertexId]>) -> SpannerReport {
    let n = g.n();
    let h = sp.graph(n);
    let subset = sp.edges.iter().all(|e| g.weight(e.u, e.v) == Some(e.w));
    let all: Vec<VertexId> = (0..n as VertexId).collect();
    let sources = sources.unwrap_or(&all);
    let mut max_ratio = Ratio::ONE;
    let mut worst = None;
    let mut reachable = true;
    for &s in sources {
        let dg = oracle::dijkstra_raw(g, s);
        let dh = oracle::dijkstra_raw(&h, s);
        for v in 0..n {
            if dg[v] == INF || dg[v] == 0 {
                continue;
            }
            if dh[v] == INF {
                reachable = false;
                worst = Some((s, v as VertexId));
                continue;
            }
            let r = Ratio::new(dh[v], dg[v]).expect("positive distance");
            if r > max_ratio {
                max_ratio = r;
                worst = Some((s, v as VertexId));
            }
        }
    }
    let passed = subset && reachable && max_ratio <= sp.stretch();
    SpannerReport { max_ratio, worst_pair: worst, subset, passed }
}

pub fn size_bound(n: usize, t: u32, c: f64) -> f64 {
    let n_f = n.max(2) as f64;
    c * t as f64 * libm::pow(n_f, 1.0 + 1.0 / t as f64) * libm::log(n_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};

    #[test]
    fn t1_keeps_everything() {
        let g = generate_graph(GraphKind::ErdosRenyi, 40, 0.2, 10, 1).unwrap();
        let sp = build_spanner(&g, 1, 5);
        assert_eq!(sp.edges, g.edges());
        assert_eq!(verify_spanner(&g, &sp, None).max_ratio, Ratio::ONE);
    }

    #[test]
    fn trees_survive() {
        for t in 1..5 {
            let g = generate_graph(GraphKind::Preferential, 50, 1.0, 20, t as u64).unwrap();
            assert_eq!(g.m(), 49);
            assert_eq!(build_spanner(&g, t, 3).edges, g.edges(), "t={t}");
            let p = generate_graph(GraphKind::Path, 30, 0.0, 5, 0).unwrap();
            let sp = build_spanner(&p, t, 3);
            assert_eq!(verify_spanner(&p, &sp, None).max_ratio, Ratio::ONE);
        }
    }

    #[test]
    fn stretch_and_size() {
        for seed in 0..3 {
            let g = generate_graph(GraphKind::ErdosRenyi, 150, 0.15, 100, seed).unwrap();
            for t in [2, 3] {
                let sp = build_spanner(&g, t, seed);
                let rep = verify_spanner(&g, &sp, None);
                assert!(rep.passed, "t={t} seed={seed} {:?}", rep);
                assert!((sp.edges.len() as f64) <= size_bound(150, t, 6.0));
                assert!(sp.edges.len() < g.m());
            }
        }
    }

    #[test]
    fn decision_rules() {
        let s = |c: VertexId| c == 7;
        let d = decide(1, false, &[(3, 2, 30), (7, 5, 70), (9, 1, 90)], s);
        assert_eq!(d.cluster, 7);
        assert_eq!(d.add, [(70, 5), (30, 2), (90, 1)]);
        assert_eq!(d.drop, Some(alloc::vec![3, 7, 9]));
        let d = decide(1, false, &[(3, 2, 30)], s);
        assert_eq!((d.cluster, d.drop), (NONE, None));
        assert_eq!(decide(7, true, &[(3, 2, 30)], s).cluster, 7);
    }
}
