use alloc::vec::Vec;
use core::str::FromStr;

use rand_core::RngCore;

use super::{GraphError, VertexId, Weight, WeightedGraph};
use crate::coin;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Path,
    Grid,
    ErdosRenyi,
    Preferential,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Path => "path",
            GraphKind::Grid => "grid",
            GraphKind::ErdosRenyi => "erdos_renyi",
            GraphKind::Preferential => "preferential",
        }
    }
}

impl FromStr for GraphKind {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, GraphError> {
        match s {
            "path" => Ok(GraphKind::Path),
            "grid" => Ok(GraphKind::Grid),
            "erdos_renyi" | "er" | "gnp" => Ok(GraphKind::ErdosRenyi),
            "preferential" | "ba" => Ok(GraphKind::Preferential),
            _ => Err(GraphError::InvalidParameter("unknown graph kind")),
        }
    }
}

pub const MAX_ATTEMPTS: u32 = 100;

fn draw_weight(rng: &mut impl RngCore, w_max: Weight) -> Weight {
    1 + ((rng.next_u64() as u128 * w_max as u128) >> 64) as Weight
}

fn draw_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic generator. `density` is the edge probability for
/// `ErdosRenyi` and the attachment count for `Preferential`; it is ignored
/// otherwise. Weights are uniform in `[1, w_max]`.
pub fn generate_graph(
    kind: GraphKind,
    n: usize,
    density: f64,
    w_max: Weight,
    seed: u64,
) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be at least 1"));
    }
    let w_max = w_max.max(1);
    let mut rng = coin::rng(seed, coin::stream::GENERATOR);
    let mut edges: Vec<(VertexId, VertexId, Weight)> = Vec::new();
    match kind {
        GraphKind::Path => {
            for i in 1..n {
                edges.push(((i - 1) as VertexId, i as VertexId, draw_weight(&mut rng, w_max)));
            }
        }
        GraphKind::Grid => {
            let cols = (1..=n).find(|c| c * c >= n).unwrap_or(1);
            for i in 0..n {
                if i % cols + 1 < cols && i + 1 < n {
                    edges.push((i as VertexId, (i + 1) as VertexId, draw_weight(&mut rng, w_max)));
                }
                if i + cols < n {
                    edges.push((i as VertexId, (i + cols) as VertexId, draw_weight(&mut rng, w_max)));
                }
            }
        }
        GraphKind::ErdosRenyi => {
            if !(0.0..=1.0).contains(&density) {
                return Err(GraphError::InvalidParameter("edge probability outside [0,1]"));
            }
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = coin::rng(coin::derive(seed, attempt as u64), coin::stream::GENERATOR);
                edges.clear();
                for u in 0..n {
                    for v in u + 1..n {
                        if draw_unit(&mut rng) < density {
                            edges.push((u as VertexId, v as VertexId, draw_weight(&mut rng, w_max)));
                        }
                    }
                }
                let g = WeightedGraph::from_edges(n, edges.iter().copied())?;
                if g.is_connected() {
                    return Ok(g);
                }
            }
            return Err(GraphError::ConnectivityFailure(MAX_ATTEMPTS));
        }
        GraphKind::Preferential => {
            let per = (libm::round(density) as usize).max(1);
            // Endpoint multiset: sampling from it is degree-proportional.
            let mut ends: Vec<VertexId> = Vec::new();
            for v in 1..n {
                let want = per.min(v);
                let mut chosen: Vec<VertexId> = Vec::with_capacity(want);
                while chosen.len() < want {
                    let t = if ends.is_empty() {
                        0
                    } else {
                        ends[(rng.next_u64() % ends.len() as u64) as usize]
                    };
                    let t = if chosen.contains(&t) {
                        // Fall back to a uniform pick among earlier vertices.
                        (rng.next_u64() % v as u64) as VertexId
                    } else {
                        t
                    };
                    if !chosen.contains(&t) {
                        chosen.push(t);
                    }
                }
                for &t in &chosen {
                    edges.push((t, v as VertexId, draw_weight(&mut rng, w_max)));
                    ends.push(t);
                    ends.push(v as VertexId);
                }
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_examples() {
        let g = generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap();
        let e: Vec<_> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        assert_eq!(e, [(0, 1, 1), (1, 2, 1)]);
        let g = generate_graph(GraphKind::Path, 1, 0.0, 1, 0).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn erdos_renyi_count_within_three_sigma() {
        let g = generate_graph(GraphKind::ErdosRenyi, 100, 0.1, 100, 7).unwrap();
        assert!(g.is_connected());
        let pairs = 100.0 * 99.0 / 2.0;
        let mean = pairs * 0.1;
        let sd = libm::sqrt(pairs * 0.1 * 0.9);
        assert!(((g.m() as f64) - mean).abs() <= 3.0 * sd, "m = {}", g.m());
        assert!(g.edges().iter().all(|e| (1..=100).contains(&e.w)));
    }

    #[test]
    fn erdos_renyi_gives_up() {
        assert_eq!(
            generate_graph(GraphKind::ErdosRenyi, 10, 0.0, 5, 1),
            Err(GraphError::ConnectivityFailure(MAX_ATTEMPTS))
        );
    }

    #[test]
    fn grid_and_preferential_connected() {
        for n in [1, 2, 5, 10, 17, 64] {
            let g = generate_graph(GraphKind::Grid, n, 0.0, 3, 2).unwrap();
            assert!(g.is_connected(), "grid {n}");
            let g = generate_graph(GraphKind::Preferential, n, 3.0, 3, 2).unwrap();
            assert!(g.is_connected(), "ba {n}");
        }
        let g = generate_graph(GraphKind::Grid, 9, 0.0, 1, 0).unwrap();
        assert_eq!(g.m(), 12);
    }

    #[test]
    fn deterministic() {
        let a = generate_graph(GraphKind::ErdosRenyi, 60, 0.1, 9, 3).unwrap();
        let b = generate_graph(GraphKind::ErdosRenyi, 60, 0.1, 9, 3).unwrap();
        assert_eq!(a, b);
    }
}
