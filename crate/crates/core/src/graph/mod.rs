//! Undirected weighted graphs, generators and exact distance oracles.

mod generate;
pub(crate) mod oracle;

pub use generate::{generate_graph, GraphKind};
pub use oracle::{all_pairs_exact, exact_sssp, hop_restricted_sssp, shortest_path_diameter};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub type VertexId = u32;
pub type Weight = u64;

/// Internal sentinel for "no path" in hot loops. Always tested before any
/// arithmetic; public results use [`Distance`].
pub(crate) const INF: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(Weight),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<Weight> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub(crate) fn from_raw(d: u64) -> Distance {
        if d == INF {
            Distance::Unreachable
        } else {
            Distance::Finite(d)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceVector {
    pub source: VertexId,
    pub dist: Vec<Distance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {v} out of range for n={n}")]
    VertexOutOfRange { v: u64, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no connected sample after {0} attempts")]
    ConnectivityFailure(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Simple undirected graph in CSR form. Edges are stored once with `u < v`,
/// sorted; adjacency lists are sorted by neighbour id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adj: Vec<(VertexId, Weight)>,
}

impl WeightedGraph {
    /// Parallel edges collapse to their minimum weight.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<WeightedGraph, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Weight)>,
    {
        if n > u32::MAX as usize {
            return Err(GraphError::InvalidParameter("n exceeds u32 range"));
        }
        let mut best: BTreeMap<(VertexId, VertexId), Weight> = BTreeMap::new();
        for (u, v, w) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange { v: x as u64, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            best.entry(key).and_modify(|c| *c = (*c).min(w)).or_insert(w);
        }
        let edges: Vec<Edge> = best.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
        Ok(Self::from_sorted_unique(n, edges))
    }

    fn from_sorted_unique(n: usize, edges: Vec<Edge>) -> WeightedGraph {
        let mut deg = alloc::vec![0usize; n + 1];
        for e in &edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        let mut offsets = alloc::vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut adj = alloc::vec![(0, 0); 2 * edges.len()];
        // Smaller neighbours first, then larger ones; edge order keeps each
        // pass sorted.
        for e in &edges {
            adj[fill[e.v as usize]] = (e.u, e.w);
            fill[e.v as usize] += 1;
        }
        for e in &edges {
            adj[fill[e.u as usize]] = (e.v, e.w);
            fill[e.u as usize] += 1;
        }
        WeightedGraph { n, edges, offsets, adj }
    }

    pub fn empty(n: usize) -> WeightedGraph {
        Self::from_sorted_unique(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, Weight)] {
        &self.adj[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn max_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<Weight> {
        let nb = self.neighbors(u);
        nb.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| nb[i].1)
    }

    /// G ∪ extra with minimum weights on shared pairs.
    pub fn union<I>(&self, extra: I) -> WeightedGraph
    where
        I: IntoIterator<Item = (VertexId, VertexId, Weight)>,
    {
        let all = self.edges.iter().map(|e| (e.u, e.v, e.w)).chain(extra);
        WeightedGraph::from_edges(self.n, all).expect("union of valid edge sets")
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = alloc::vec![false; self.n];
        let mut stack = alloc::vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }
}
