//! Thorup–Zwick hierarchies, sketches and the level-scan query.

use alloc::vec::Vec;

use crate::coin;
use crate::explore::{self, CapExceeded, Entry};
use crate::graph::{oracle, GraphError, VertexId, Weight, WeightedGraph, INF};
use crate::ratio::Ratio;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TzError {
    #[error("k={k} outside [1, ceil(log2 n)+1] for n={n}")]
    InvalidK { k: u32, n: usize },
    #[error("sketches come from different sketch sets")]
    SketchMismatch,
    #[error("no level resolves the pair ({0}, {1})")]
    Unresolved(VertexId, VertexId),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn max_k(n: usize) -> u32 {
    let mut b = 0;
    while (1usize << b) < n {
        b += 1;
    }
    b + 1
}

/// A_0 ⊇ A_1 ⊇ … ⊇ A_{k-1}; `top[v]` is the largest i with v ∈ A_i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelHierarchy {
    k: u32,
    seed: u64,
    top: Vec<u8>,
}

pub fn sampling_probability(n: usize, k: u32) -> f64 {
    libm::pow(n as f64, -1.0 / k as f64)
}

/// Each vertex of A_{i-1} enters A_i with probability n^{-1/k}. The coin for
/// (v, i) depends only on the seed, so machines can evaluate it locally.
pub fn sample_hierarchy(n: usize, k: u32, seed: u64) -> Result<LevelHierarchy, TzError> {
    if k < 1 || k > max_k(n) || k > 255 {
        return Err(TzError::InvalidK { k, n });
    }
    let p = sampling_probability(n, k);
    let top = (0..n as u64)
        .map(|v| {
            let mut t = 0u8;
            while (t as u32) + 1 < k && in_next_level(seed, t as u32 + 1, v, p) {
                t += 1;
            }
            t
        })
        .collect();
    Ok(LevelHierarchy { k, seed, top })
}

pub fn in_next_level(seed: u64, level: u32, v: u64, p: f64) -> bool {
    coin::bernoulli(seed, coin::stream::TZ_LEVEL + level as u64, v, p)
}

impl LevelHierarchy {
    /// Explicit hierarchy; `levels[i-1]` lists A_i for i = 1..k-1.
    pub fn from_levels(n: usize, k: u32, levels: &[Vec<VertexId>]) -> Result<LevelHierarchy, TzError> {
        if k < 1 || levels.len() + 1 != k as usize {
            return Err(TzError::InvalidK { k, n });
        }
        let mut top = alloc::vec![0u8; n];
        for (i, set) in levels.iter().enumerate() {
            for &v in set {
                if v as usize >= n || top[v as usize] as usize != i {
                    return Err(TzError::Graph(GraphError::InvalidParameter("levels must be nested")));
                }
                top[v as usize] = (i + 1) as u8;
            }
        }
        Ok(LevelHierarchy { k, seed: 0, top })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.top.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn top_level(&self, v: VertexId) -> u32 {
        self.top[v as usize] as u32
    }

    /// v ∈ A_i (A_k is empty).
    pub fn contains(&self, i: u32, v: VertexId) -> bool {
        i < self.k && self.top[v as usize] as u32 >= i
    }

    pub fn members(&self, i: u32) -> Vec<VertexId> {
        (0..self.n() as VertexId).filter(|&v| self.contains(i, v)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pivot {
    pub id: VertexId,
    pub dist: Weight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BunchEntry {
    pub id: VertexId,
    pub level: u8,
    pub dist: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistanceSketch {
    pub owner: VertexId,
    /// p_0..p_{k-1}; `None` when A_i is empty or out of reach.
    pub pivots: Vec<Option<Pivot>>,
    /// Sorted by id.
    pub bunch: Vec<BunchEntry>,
}

impl DistanceSketch {
    pub fn lookup(&self, id: VertexId) -> Option<&BunchEntry> {
        self.bunch.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.bunch[i])
    }

    /// Length of [`to_words`](Self::to_words).
    pub fn words(&self) -> usize {
        3 + 2 * self.pivots.len() + 3 * self.bunch.len()
    }

    pub fn to_words(&self, out: &mut Vec<u64>) {
        out.push(self.owner as u64);
        out.push(self.pivots.len() as u64);
        for p in &self.pivots {
            match p {
                Some(p) => {
                    out.push(p.id as u64);
                    out.push(p.dist);
                }
                None => {
                    out.push(u32::MAX as u64);
                    out.push(INF);
                }
            }
        }
        out.push(self.bunch.len() as u64);
        for e in &self.bunch {
            out.push(e.id as u64);
            out.push(e.level as u64);
            out.push(e.dist);
        }
    }

    /// Inverse of [`to_words`](Self::to_words); returns the sketch and the
    /// number of words consumed.
    pub fn from_words(w: &[u64]) -> Option<(DistanceSketch, usize)> {
        let owner = *w.first()? as VertexId;
        let k = *w.get(1)? as usize;
        let mut at = 2;
        let mut pivots = Vec::with_capacity(k);
        for _ in 0..k {
            let id = *w.get(at)?;
            let dist = *w.get(at + 1)?;
            at += 2;
            pivots.push(if id == u32::MAX as u64 { None } else { Some(Pivot { id: id as VertexId, dist }) });
        }
        let b = *w.get(at)? as usize;
        at += 1;
        let mut bunch = Vec::with_capacity(b);
        for _ in 0..b {
            bunch.push(BunchEntry {
                id: *w.get(at)? as VertexId,
                level: *w.get(at + 1)? as u8,
                dist: *w.get(at + 2)?,
            });
            at += 3;
        }
        Some((DistanceSketch { owner, pivots, bunch }, at))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchSet {
    pub k: u32,
    pub seed: u64,
    /// Hop limit of the explorations that produced the distances, if any.
    pub hop_limit: Option<u64>,
    pub certificate: Ratio,
    pub sketches: Vec<DistanceSketch>,
}

impl SketchSet {
    pub fn n(&self) -> usize {
        self.sketches.len()
    }

    pub fn query(&self, u: VertexId, v: VertexId) -> Result<Weight, TzError> {
        query(&self.sketches[u as usize], &self.sketches[v as usize])
    }
}

/// Scan j = 0..k-1: first test p_j(u) ∈ B_j(v), then p_j(v) ∈ B_j(u).
pub fn query(su: &DistanceSketch, sv: &DistanceSketch) -> Result<Weight, TzError> {
    if su.pivots.len() != sv.pivots.len() {
        return Err(TzError::SketchMismatch);
    }
    for j in 0..su.pivots.len() {
        for (a, b) in [(su, sv), (sv, su)] {
            if let Some(p) = a.pivots[j] {
                if let Some(e) = b.lookup(p.id) {
                    if e.level as usize == j {
                        return Ok(p.dist + e.dist);
                    }
                }
            }
        }
    }
    Err(TzError::Unresolved(su.owner, sv.owner))
}

pub fn tz_stretch(k: u32) -> Ratio {
    Ratio::integer(2 * k as u64 - 1)
}

/// Reference construction on exact distances: virtual-source Dijkstra per
/// level for pivots, then Dijkstra from each A_i∖A_{i+1} center truncated by
/// the bunch condition.
pub fn build_sketches_centralized(g: &WeightedGraph, h: &LevelHierarchy) -> Result<SketchSet, TzError> {
    let n = g.n();
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let k = h.k();
    let mut pivots: Vec<Vec<Option<Pivot>>> = alloc::vec![alloc::vec![None; k as usize]; n];
    let mut thr = alloc::vec![INF; n];
    let mut bunch: Vec<Vec<BunchEntry>> = alloc::vec![Vec::new(); n];
    for i in (0..k).rev() {
        let centers = h.members(i);
        let near = oracle::nearest_source(g, &centers);
        for v in 0..n {
            pivots[v][i as usize] = near[v].map(|(d, id)| Pivot { id, dist: d });
        }
        for &c in centers.iter().filter(|&&c| !h.contains(i + 1, c)) {
            for (v, d) in oracle::truncated_dijkstra(g, c, &thr) {
                bunch[v as usize].push(BunchEntry { id: c, level: i as u8, dist: d });
            }
        }
        for v in 0..n {
            thr[v] = near[v].map_or(INF, |x| x.0);
        }
    }
    Ok(assemble(h, None, tz_stretch(k), pivots, bunch))
}

pub(crate) fn assemble(
    h: &LevelHierarchy,
    hop_limit: Option<u64>,
    certificate: Ratio,
    pivots: Vec<Vec<Option<Pivot>>>,
    bunch: Vec<Vec<BunchEntry>>,
) -> SketchSet {
    let sketches = pivots
        .into_iter()
        .zip(bunch)
        .enumerate()
        .map(|(v, (pivots, mut bunch))| {
            bunch.sort();
            DistanceSketch { owner: v as VertexId, pivots, bunch }
        })
        .collect();
    SketchSet { k: h.k(), seed: h.seed(), hop_limit, certificate, sketches }
}

/// Construction from `hop`-limited explorations, the semantics every
/// distributed executor reproduces. With `hop >= n-1` it equals
/// [`build_sketches_centralized`].
pub fn build_sketches_hop_limited(
    g: &WeightedGraph,
    h: &LevelHierarchy,
    hop: u64,
    cap: usize,
    certificate: Ratio,
) -> Result<SketchSet, TzError> {
    build_sketches_with(&mut explore::Sequential, g, h, hop, cap, certificate)
}

/// [`build_sketches_hop_limited`] on any executor.
pub fn build_sketches_with(
    ex: &mut dyn explore::Executor,
    g: &WeightedGraph,
    h: &LevelHierarchy,
    hop: u64,
    cap: usize,
    certificate: Ratio,
) -> Result<SketchSet, TzError> {
    let n = g.n();
    let k = h.k();
    let mut pivots: Vec<Vec<Option<Pivot>>> = alloc::vec![alloc::vec![None; k as usize]; n];
    let mut thr = alloc::vec![INF; n];
    let mut bunch: Vec<Vec<BunchEntry>> = alloc::vec![Vec::new(); n];
    for i in (0..k).rev() {
        let seeds: Vec<(VertexId, u64, u32)> = h.members(i).into_iter().map(|c| (c, 0, c)).collect();
        let labels = ex.single_label(g, &seeds, hop, &|_, _| true);
        let init: Vec<(VertexId, Entry)> = seeds
            .iter()
            .filter(|s| !h.contains(i + 1, s.0))
            .map(|&(c, _, _)| (c, Entry { key: c, dist: 0, tag: c }))
            .collect();
        let t = ex.keyed(g, &init, hop, &|v, d| d < thr[v as usize], cap)?;
        for (v, tb) in t.tables.iter().enumerate() {
            bunch[v].extend(tb.iter().map(|e| BunchEntry { id: e.key, level: i as u8, dist: e.dist }));
        }
        for v in 0..n {
            pivots[v][i as usize] = labels[v].map(|(d, id)| Pivot { id, dist: d });
            thr[v] = labels[v].map_or(INF, |x| x.0);
        }
    }
    Ok(assemble(h, Some(hop), certificate, pivots, bunch))
}

/// Default per-level admission cap C·k·n^{1/k}·ln n.
pub fn default_cap(n: usize, k: u32, c: f64) -> usize {
    let n_f = (n.max(2)) as f64;
    libm::ceil(c * k as f64 * libm::pow(n_f, 1.0 / k as f64) * libm::log(n_f)) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeReport {
    pub max_bunch: usize,
    pub mean_bunch: f64,
    pub total_words: usize,
    pub bound: f64,
    pub flagged: Vec<VertexId>,
}

pub fn sketch_size_report(ss: &SketchSet, c_b: f64) -> SizeReport {
    let n = ss.n();
    let n_f = n.max(2) as f64;
    let bound = c_b * ss.k as f64 * libm::pow(n_f, 1.0 / ss.k as f64) * libm::log(n_f);
    let sizes: Vec<usize> = ss.sketches.iter().map(|s| s.bunch.len()).collect();
    SizeReport {
        max_bunch: sizes.iter().copied().max().unwrap_or(0),
        mean_bunch: if n == 0 { 0.0 } else { sizes.iter().sum::<usize>() as f64 / n as f64 },
        total_words: ss.sketches.iter().map(|s| s.words()).sum(),
        bound,
        flagged: (0..n).filter(|&v| sizes[v] as f64 > bound).map(|v| v as VertexId).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_exact, generate_graph, GraphKind};

    fn path3() -> WeightedGraph {
        generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap()
    }

    #[test]
    fn k1_has_only_a0() {
        let h = sample_hierarchy(10, 1, 3).unwrap();
        assert!((0..10).all(|v| h.top_level(v) == 0));
        assert!(sample_hierarchy(10, 6, 3).is_err());
        assert!(sample_hierarchy(10, 5, 3).is_ok());
    }

    #[test]
    fn level_one_size_binomial() {
        let h = sample_hierarchy(10000, 2, 5).unwrap();
        let a1 = h.members(1).len() as f64;
        let sd = libm::sqrt(10000.0 * 0.01 * 0.99);
        assert!((a1 - 100.0).abs() <= 4.0 * sd, "|A_1| = {a1}");
    }

    #[test]
    fn hierarchy_deterministic() {
        assert_eq!(sample_hierarchy(4, 2, 11).unwrap(), sample_hierarchy(4, 2, 11).unwrap());
    }

    #[test]
    fn path_hand_example() {
        let h = LevelHierarchy::from_levels(3, 2, &[alloc::vec![2]]).unwrap();
        let ss = build_sketches_centralized(&path3(), &h).unwrap();
        let s0 = &ss.sketches[0];
        assert_eq!(s0.pivots[1], Some(Pivot { id: 2, dist: 2 }));
        let ids: Vec<_> = s0.bunch.iter().filter(|e| e.level == 0).map(|e| e.id).collect();
        assert_eq!(ids, [0, 1]);
        assert_eq!(s0.lookup(2).map(|e| e.level), Some(1));
    }

    #[test]
    fn k1_full_bunches_exact_queries() {
        let g = generate_graph(GraphKind::ErdosRenyi, 30, 0.2, 9, 2).unwrap();
        let h = sample_hierarchy(30, 1, 0).unwrap();
        let ss = build_sketches_centralized(&g, &h).unwrap();
        let ap = all_pairs_exact(&g);
        for u in 0..30u32 {
            assert_eq!(ss.sketches[u as usize].bunch.len(), 30);
            for v in 0..30u32 {
                assert_eq!(ss.query(u, v).unwrap(), ap[u as usize * 30 + v as usize]);
            }
        }
        let rep = sketch_size_report(&ss, 4.0);
        assert_eq!(rep.max_bunch, 30);
    }

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::empty(1);
        let ss = build_sketches_centralized(&g, &sample_hierarchy(1, 1, 0).unwrap()).unwrap();
        assert_eq!(ss.sketches[0].pivots, [Some(Pivot { id: 0, dist: 0 })]);
        assert_eq!(ss.sketches[0].bunch, [BunchEntry { id: 0, level: 0, dist: 0 }]);
        assert_eq!(ss.query(0, 0), Ok(0));
    }

    /// Definition-level oracle from an all-pairs matrix.
    fn brute_force(g: &WeightedGraph, h: &LevelHierarchy) -> Vec<(Vec<Option<Pivot>>, Vec<BunchEntry>)> {
        let n = g.n();
        let ap = all_pairs_exact(g);
        let d = |u: usize, v: usize| ap[u * n + v];
        (0..n)
            .map(|u| {
                let piv: Vec<Option<Pivot>> = (0..h.k())
                    .map(|i| {
                        h.members(i)
                            .into_iter()
                            .map(|w| (d(u, w as usize), w))
                            .min()
                            .map(|(dist, id)| Pivot { id, dist })
                    })
                    .collect();
                let mut b = Vec::new();
                for i in 0..h.k() {
                    let next = if i + 1 < h.k() { piv[i as usize + 1].map_or(INF, |p| p.dist) } else { INF };
                    for w in h.members(i) {
                        if !h.contains(i + 1, w) && d(u, w as usize) < next {
                            b.push(BunchEntry { id: w, level: i as u8, dist: d(u, w as usize) });
                        }
                    }
                }
                b.sort();
                (piv, b)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_and_stretch() {
        for (seed, k) in [(1u64, 2u32), (2, 3), (3, 2)] {
            let g = generate_graph(GraphKind::ErdosRenyi, 120, 0.06, 50, seed).unwrap();
            let h = sample_hierarchy(120, k, seed).unwrap();
            let ss = build_sketches_centralized(&g, &h).unwrap();
            let bf = brute_force(&g, &h);
            for (u, (piv, b)) in bf.iter().enumerate() {
                assert_eq!(&ss.sketches[u].pivots, piv);
                assert_eq!(&ss.sketches[u].bunch, b);
            }
            let hl = build_sketches_hop_limited(&g, &h, 119, usize::MAX, tz_stretch(k)).unwrap();
            assert_eq!(hl.sketches, ss.sketches);
            let ap = all_pairs_exact(&g);
            for u in 0..120u32 {
                for v in 0..120u32 {
                    let d = ap[u as usize * 120 + v as usize];
                    let est = ss.query(u, v).unwrap();
                    assert!(d <= est && tz_stretch(k).bounds(est, d), "{u} {v} {d} {est}");
                }
            }
        }
    }

    #[test]
    fn word_round_trip() {
        let g = generate_graph(GraphKind::Grid, 25, 0.0, 7, 4).unwrap();
        let ss = build_sketches_centralized(&g, &sample_hierarchy(25, 3, 9).unwrap()).unwrap();
        let mut w = Vec::new();
        for s in &ss.sketches {
            w.clear();
            s.to_words(&mut w);
            assert_eq!(w.len(), s.words());
            assert_eq!(DistanceSketch::from_words(&w), Some((s.clone(), w.len())));
        }
    }
}
