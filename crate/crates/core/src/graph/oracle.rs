use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{Distance, DistanceVector, GraphError, VertexId, WeightedGraph, INF};

/// Dijkstra from `s`, raw distances with `INF` for unreachable.
pub(crate) fn dijkstra_raw(g: &WeightedGraph, s: VertexId) -> Vec<u64> {
    let mut dist = alloc::vec![INF; g.n()];
    let mut heap = BinaryHeap::new();
    dist[s as usize] = 0;
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Dijkstra from a virtual source joined to `sources` by zero-weight edges;
/// labels are `(dist, source)` so ties go to the smallest source id.
pub(crate) fn nearest_source(g: &WeightedGraph, sources: &[VertexId]) -> Vec<Option<(u64, VertexId)>> {
    let mut best: Vec<(u64, VertexId)> = alloc::vec![(INF, VertexId::MAX); g.n()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        best[s as usize] = (0, s.min(best[s as usize].1));
        heap.push(Reverse((0u64, s, s)));
    }
    while let Some(Reverse((d, src, u))) = heap.pop() {
        if (d, src) > best[u as usize] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let c = (d + w, src);
            if c < best[v as usize] {
                best[v as usize] = c;
                heap.push(Reverse((c.0, src, v)));
            }
        }
    }
    best.into_iter().map(|b| if b.0 == INF { None } else { Some(b) }).collect()
}

/// Dijkstra from `c` visiting only vertices with `d(c, v) < limit[v]`.
pub(crate) fn truncated_dijkstra(g: &WeightedGraph, c: VertexId, limit: &[u64]) -> Vec<(VertexId, u64)> {
    let mut out = Vec::new();
    if limit[c as usize] == 0 {
        return out;
    }
    let mut dist: alloc::collections::BTreeMap<VertexId, u64> = alloc::collections::BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(c, 0);
    heap.push(Reverse((0u64, c)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist.get(&u).is_some_and(|&x| d > x) {
            continue;
        }
        out.push((u, d));
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < limit[v as usize] && dist.get(&v).is_none_or(|&x| nd < x) {
                dist.insert(v, nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    out
}

pub fn exact_sssp(g: &WeightedGraph, s: VertexId) -> DistanceVector {
    let dist = dijkstra_raw(g, s).into_iter().map(Distance::from_raw).collect();
    DistanceVector { source: s, dist }
}

/// Row-major n×n matrix of exact distances (`INF` when unreachable).
pub fn all_pairs_exact(g: &WeightedGraph) -> Vec<u64> {
    let mut out = Vec::with_capacity(g.n() * g.n());
    for s in 0..g.n() {
        out.extend(dijkstra_raw(g, s as VertexId));
    }
    out
}

/// Minimum weight over walks of at most `h` edges. Synchronous relaxation
/// rounds touching only vertices that improved in the previous round.
pub(crate) fn hop_restricted_raw(g: &WeightedGraph, s: VertexId, h: u64) -> Vec<u64> {
    let n = g.n();
    let mut dist = alloc::vec![INF; n];
    dist[s as usize] = 0;
    let mut frontier = alloc::vec![s];
    let mut next = alloc::vec![INF; n];
    let mut touched: Vec<VertexId> = Vec::new();
    let mut round = 0;
    while round < h && !frontier.is_empty() {
        for &u in &frontier {
            let du = dist[u as usize];
            for &(v, w) in g.neighbors(u) {
                let nd = du + w;
                if nd < dist[v as usize] && nd < next[v as usize] {
                    if next[v as usize] == INF {
                        touched.push(v);
                    }
                    next[v as usize] = nd;
                }
            }
        }
        frontier.clear();
        for &v in &touched {
            let nd = next[v as usize];
            next[v as usize] = INF;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                frontier.push(v);
            }
        }
        touched.clear();
        round += 1;
    }
    dist
}

pub fn hop_restricted_sssp(g: &WeightedGraph, s: VertexId, h: u64) -> DistanceVector {
    let dist = hop_restricted_raw(g, s, h).into_iter().map(Distance::from_raw).collect();
    DistanceVector { source: s, dist }
}

/// Λ: over all pairs, the fewest hops among minimum-weight paths, maximised.
pub fn shortest_path_diameter(g: &WeightedGraph) -> Result<u64, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let n = g.n();
    let mut best = 0u64;
    for s in 0..n as VertexId {
        // Lexicographic (weight, hops) Dijkstra.
        let mut dist = alloc::vec![(INF, u64::MAX); n];
        let mut heap = BinaryHeap::new();
        dist[s as usize] = (0, 0);
        heap.push(Reverse((0u64, 0u64, s)));
        while let Some(Reverse((d, hops, u))) = heap.pop() {
            if (d, hops) > dist[u as usize] {
                continue;
            }
            for &(v, w) in g.neighbors(u) {
                let cand = (d + w, hops + 1);
                if cand < dist[v as usize] {
                    dist[v as usize] = cand;
                    heap.push(Reverse((cand.0, cand.1, v)));
                }
            }
        }
        best = best.max(dist.iter().map(|x| x.1).max().unwrap_or(0));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 10), (0, 2, 1), (2, 1, 1)]).unwrap()
    }

    fn fin(v: &DistanceVector) -> Vec<Option<u64>> {
        v.dist.iter().map(|d| d.finite()).collect()
    }

    #[test]
    fn dijkstra_examples() {
        let p = generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap();
        assert_eq!(fin(&exact_sssp(&p, 0)), [Some(0), Some(1), Some(2)]);
        assert_eq!(exact_sssp(&triangle(), 0).dist[1], Distance::Finite(2));
    }

    #[test]
    fn hop_examples() {
        let p = generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap();
        assert_eq!(hop_restricted_sssp(&p, 0, 1).dist[2], Distance::Unreachable);
        assert_eq!(hop_restricted_sssp(&p, 0, 2).dist[2], Distance::Finite(2));
        let t = triangle();
        assert_eq!(hop_restricted_sssp(&t, 0, 1).dist[1], Distance::Finite(10));
        assert_eq!(hop_restricted_sssp(&t, 0, 2).dist[1], Distance::Finite(2));
        assert_eq!(fin(&hop_restricted_sssp(&t, 0, 0)), [Some(0), None, None]);
    }

    #[test]
    fn cross_oracle_agreement() {
        let g = generate_graph(GraphKind::ErdosRenyi, 50, 0.2, 10, 3).unwrap();
        assert_eq!(exact_sssp(&g, 0), hop_restricted_sssp(&g, 0, 49));
    }

    #[test]
    fn diameter_examples() {
        let p = generate_graph(GraphKind::Path, 5, 0.0, 1, 0).unwrap();
        assert_eq!(shortest_path_diameter(&p), Ok(4));
        let k = WeightedGraph::from_edges(
            5,
            (0..5u32).flat_map(|u| (u + 1..5).map(move |v| (u, v, 1))),
        )
        .unwrap();
        assert_eq!(shortest_path_diameter(&k), Ok(1));
        assert_eq!(shortest_path_diameter(&triangle()), Ok(2));
        assert_eq!(
            shortest_path_diameter(&WeightedGraph::empty(2)),
            Err(GraphError::Disconnected)
        );
    }

    #[test]
    fn diameter_matches_hop_sweep() {
        // Λ is the least h with d^h = d for every pair.
        let g = generate_graph(GraphKind::ErdosRenyi, 30, 0.15, 20, 5).unwrap();
        let lam = shortest_path_diameter(&g).unwrap();
        let exact = all_pairs_exact(&g);
        let agrees = |h: u64| {
            (0..30u32).all(|s| hop_restricted_raw(&g, s, h)[..] == exact[s as usize * 30..][..30])
        };
        assert!(agrees(lam));
        assert!(lam == 0 || !agrees(lam - 1));
    }
}
