//! Certificate checks against exact distances.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coin;
use crate::graph::{oracle, DistanceVector, VertexId, Weight, WeightedGraph, INF};
use crate::ratio::Ratio;
use crate::tz::SketchSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairs {
    /// Every ordered pair.
    All,
    /// `count` pairs drawn with replacement; exhaustive when `count ≥ n²`.
    Sampled { count: u64, seed: u64 },
}

impl Pairs {
    pub fn draw(self, n: usize) -> Vec<(VertexId, VertexId)> {
        let nn = (n as u64) * (n as u64);
        match self {
            Pairs::Sampled { count, seed } if count < nn => (0..count)
                .map(|i| {
                    let w = coin::word(seed, coin::stream::GENERATOR + 2, i);
                    ((w % n as u64) as VertexId, ((w >> 32) % n as u64) as VertexId)
                })
                .collect(),
            _ => (0..n as VertexId).flat_map(|u| (0..n as VertexId).map(move |v| (u, v))).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Estimate below the true distance.
    Under,
    /// Estimate above certificate × distance.
    Over,
    /// No estimate for a connected pair.
    Missing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub u: VertexId,
    pub v: VertexId,
    pub estimate: Option<Weight>,
    pub dist: Weight,
    pub fault: Fault,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StretchReport {
    pub checked: u64,
    /// Largest estimate / distance seen, as a float for display.
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
}

impl StretchReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, u: VertexId, v: VertexId, est: Option<Weight>, d: Weight, cert: Ratio) {
        if d == INF {
            return;
        }
        self.checked += 1;
        let fault = match est {
            None => Some(Fault::Missing),
            Some(e) if e < d => Some(Fault::Under),
            Some(e) if !cert.bounds(e, d) => Some(Fault::Over),
            _ => None,
        };
        if let (Some(e), true) = (est, d > 0) {
            self.max_ratio = self.max_ratio.max(e as f64 / d as f64);
        }
        if let Some(fault) = fault {
            self.violations.push(Violation { u, v, estimate: est, dist: d, fault });
        }
    }
}

/// d ≤ query(u, v) ≤ cert·d on the chosen pairs; the certificate is
/// compared exactly.
pub fn check_sketches(g: &WeightedGraph, s: &SketchSet, cert: Ratio, pairs: Pairs) -> StretchReport {
    let mut by_source: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for (u, v) in pairs.draw(g.n()) {
        by_source.entry(u).or_default().push(v);
    }
    let mut rep = StretchReport::default();
    for (u, targets) in by_source {
        let exact = oracle::dijkstra_raw(g, u);
        for v in targets {
            rep.check(u, v, s.query(u, v).ok(), exact[v as usize], cert);
        }
    }
    rep
}

/// d(s, v) ≤ est(v) ≤ cert·d(s, v) for every v.
pub fn check_sssp(g: &WeightedGraph, est: &DistanceVector, cert: Ratio) -> StretchReport {
    let exact = oracle::dijkstra_raw(g, est.source);
    let mut rep = StretchReport::default();
    for (v, e) in est.dist.iter().enumerate() {
        rep.check(est.source, v as VertexId, e.finite(), exact[v], cert);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};
    use crate::tz::{build_sketches_centralized, sample_hierarchy};

    #[test]
    fn exact_sketches_pass_and_tampering_fails() {
        let g = generate_graph(GraphKind::ErdosRenyi, 30, 0.2, 10, 1).unwrap();
        let h = sample_hierarchy(30, 2, 1).unwrap();
        let mut s = build_sketches_centralized(&g, &h).unwrap();
        let three = Ratio::integer(3);
        let rep = check_sketches(&g, &s, three, Pairs::All);
        assert!(rep.passed() && rep.checked == 900);
        for e in s.sketches[4].bunch.iter_mut() {
            e.dist = e.dist.saturating_sub(1);
        }
        for p in s.sketches[4].pivots.iter_mut().flatten() {
            p.dist = p.dist.saturating_sub(1);
        }
        let rep = check_sketches(&g, &s, three, Pairs::All);
        assert!(rep.violations.iter().any(|x| x.fault == Fault::Under));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = Pairs::Sampled { count: 50, seed: 3 }.draw(20);
        assert_eq!(a, Pairs::Sampled { count: 50, seed: 3 }.draw(20));
        assert_eq!(a.len(), 50);
        assert_eq!(Pairs::Sampled { count: 500, seed: 3 }.draw(20).len(), 400);
    }
}
