//! Congested Clique executor. Every ordered pair of nodes may exchange one
//! message of at most `c_w` words per round; node v starts out knowing only
//! its incident edges. Explorations follow the reference semantics of
//! [`crate::explore`], so the hopset and sketch drivers run unchanged.

use alloc::string::String;
use alloc::vec::Vec;

use crate::explore::{improve, lookup, CapExceeded, Entry, Executor, Tables};
use crate::graph::{Distance, Edge, GraphError, VertexId, Weight, WeightedGraph};
use crate::hopset::{build_hopset_with, Hopset, HopsetError, MAX_RETRIES};
use crate::pipeline::{hierarchy, hop_limit, PipelineConfig};
use crate::spanner::{cluster_sampled, decide, lightest_per_cluster, Spanner, NONE};
use crate::tz::{self, build_sketches_with, DistanceSketch, SketchSet, TzError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueConfig {
    /// Words per message; two models one id plus one distance.
    pub c_w: u64,
    pub coordinator: VertexId,
    pub seed: u64,
}

impl CliqueConfig {
    pub fn new(seed: u64) -> CliqueConfig {
        CliqueConfig { c_w: 2, coordinator: 0, seed }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CliqueError {
    #[error("round {round}: second message from {from} to {to}")]
    BudgetViolation { round: u64, from: VertexId, to: VertexId },
    #[error("round {round}: {words}-word message from {from} to {to} exceeds {limit}")]
    PayloadTooLarge { round: u64, from: VertexId, to: VertexId, words: u64, limit: u64 },
    #[error("no oracle at the coordinator")]
    NotBuilt,
    #[error("no admissible hierarchy after {0} attempts")]
    RetriesExhausted(u32),
    #[error(transparent)]
    Hopset(#[from] HopsetError),
    #[error(transparent)]
    Tz(#[from] TzError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseCount {
    pub label: String,
    pub rounds: u64,
    pub messages: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueMetrics {
    pub rounds: u64,
    pub messages: u64,
    /// In order of first use.
    pub phases: Vec<PhaseCount>,
}

impl CliqueMetrics {
    pub fn phase(&self, label: &str) -> PhaseCount {
        self.phases.iter().find(|p| p.label == label).cloned().unwrap_or_default()
    }

    fn charge(&mut self, label: &str, rounds: u64, messages: u64) {
        self.rounds += rounds;
        self.messages += messages;
        match self.phases.iter_mut().find(|p| p.label == label) {
            Some(p) => {
                p.rounds += rounds;
                p.messages += messages;
            }
            None => self.phases.push(PhaseCount { label: label.into(), rounds, messages }),
        }
    }
}

/// One message: sender, receiver, payload.
pub type Msg = (VertexId, VertexId, Vec<u64>);

pub struct Clique {
    pub cfg: CliqueConfig,
    g: WeightedGraph,
    pub metrics: CliqueMetrics,
    label: &'static str,
    fault: Option<CliqueError>,
    oracle: Option<SketchSet>,
}

impl Clique {
    pub fn new(g: &WeightedGraph, cfg: CliqueConfig) -> Result<Clique, CliqueError> {
        if cfg.coordinator as usize >= g.n().max(1) {
            return Err(GraphError::VertexOutOfRange { v: cfg.coordinator as u64, n: g.n() }.into());
        }
        Ok(Clique { cfg, g: g.clone(), metrics: CliqueMetrics::default(), label: "bf", fault: None, oracle: None })
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    /// Deliver one round of messages, enforcing the per-pair budget. A
    /// violation is recorded and poisons the executor.
    pub fn round(&mut self, msgs: &mut [Msg]) -> Result<(), CliqueError> {
        let round = self.metrics.rounds + 1;
        msgs.sort_by_key(|m| (m.0, m.1));
        for w in msgs.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return self.fail(CliqueError::BudgetViolation { round, from: w[0].0, to: w[0].1 });
            }
        }
        for m in msgs.iter() {
            if m.2.len() as u64 > self.cfg.c_w {
                return self.fail(CliqueError::PayloadTooLarge { round, from: m.0, to: m.1, words: m.2.len() as u64, limit: self.cfg.c_w });
            }
        }
        self.metrics.charge(self.label, 1, msgs.len() as u64);
        Ok(())
    }

    fn fail(&mut self, e: CliqueError) -> Result<(), CliqueError> {
        if self.fault.is_none() {
            self.fault = Some(e.clone());
        }
        Err(e)
    }

    fn check(&mut self) -> Result<(), CliqueError> {
        match self.fault.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Rounds in which nobody sends: only counted.
    fn idle(&mut self, rounds: u64) {
        self.metrics.charge(self.label, rounds, 0);
    }

    /// Every node tells the coordinator a count, which answers with the
    /// maximum: the synchronizer closing one pipelined iteration.
    fn agree_max(&mut self, counts: &[usize]) -> usize {
        let c = self.cfg.coordinator;
        let n = counts.len() as VertexId;
        let mut up: Vec<Msg> = (0..n).filter(|&v| v != c).map(|v| (v, c, alloc::vec![counts[v as usize] as u64])).collect();
        let mut down: Vec<Msg> = (0..n).filter(|&v| v != c).map(|v| (c, v, alloc::vec![0])).collect();
        let max = counts.iter().copied().max().unwrap_or(0);
        down.iter_mut().for_each(|m| m.2[0] = max as u64);
        if self.round(&mut up).is_ok() {
            let _ = self.round(&mut down);
        }
        max
    }

    /// The coordinator's oracle, once built.
    pub fn oracle(&self) -> Option<&SketchSet> {
        self.oracle.as_ref()
    }
}

impl Executor for Clique {
    /// Iterations are pipelined: a node streams its changed entries, one per
    /// neighbour per round in slot order (key mod cap), and a max-agreement
    /// through the coordinator closes the iteration. Keys double as tags
    /// except in single-key runs, whose messages carry the tag instead.
    fn keyed(
        &mut self,
        g: &WeightedGraph,
        init: &[(VertexId, Entry)],
        h: u64,
        admit: &dyn Fn(VertexId, u64) -> bool,
        cap: usize,
    ) -> Result<Tables, CapExceeded> {
        let n = g.n();
        let single = init.iter().all(|(_, e)| e.key == 0);
        let mut tables: Vec<Vec<Entry>> = alloc::vec![Vec::new(); n];
        for &(v, e) in init {
            if !single && e.tag != e.key {
                let _ = self.fail(CliqueError::Graph(GraphError::InvalidParameter("clique messages carry key or tag, not both")));
            }
            if admit(v, e.dist) {
                improve(&mut tables[v as usize], e);
            }
        }
        for (v, t) in tables.iter().enumerate() {
            if t.len() > cap {
                return Err(CapExceeded { vertex: v as VertexId, admitted: t.len(), cap });
            }
        }
        let window = cap.clamp(1, n.max(1)) as u32;
        let mut delta: Vec<Vec<Entry>> = tables.clone();
        let mut iterations = 0;
        for _ in 0..h {
            for d in delta.iter_mut() {
                d.sort_by_key(|e| (e.key % window, e.key));
            }
            let len = self.agree_max(&delta.iter().map(Vec::len).collect::<Vec<_>>());
            if len == 0 || self.fault.is_some() {
                break;
            }
            let mut cand: Vec<Vec<Entry>> = alloc::vec![Vec::new(); n];
            for slot in 0..len {
                let mut msgs = Vec::new();
                for u in 0..n {
                    if let Some(e) = delta[u].get(slot) {
                        let id = if single { e.tag } else { e.key };
                        for &(v, _) in g.neighbors(u as VertexId) {
                            msgs.push((u as VertexId, v, alloc::vec![id as u64, e.dist]));
                        }
                    }
                }
                if self.round(&mut msgs).is_err() {
                    break;
                }
                // Receivers add the weight of the edge they heard over.
                for (u, v, pl) in msgs {
                    let d = pl[1] + g.weight(u, v).expect("message over an edge");
                    if admit(v, d) {
                        let (key, tag) = if single { (0, pl[0] as u32) } else { (pl[0] as u32, pl[0] as u32) };
                        cand[v as usize].push(Entry { key, dist: d, tag });
                    }
                }
            }
            let mut changed = false;
            for v in 0..n {
                let c = &mut cand[v];
                c.sort_by_key(|e| (e.key, e.dist, e.tag));
                c.dedup_by_key(|e| e.key);
                delta[v].clear();
                for &e in c.iter() {
                    let better = lookup(&tables[v], e.key).is_none_or(|cur| e.better_than(cur));
                    if better && improve(&mut tables[v], e) {
                        delta[v].push(e);
                    }
                }
                changed |= !delta[v].is_empty();
                if tables[v].len() > cap {
                    return Err(CapExceeded { vertex: v as VertexId, admitted: tables[v].len(), cap });
                }
            }
            if changed {
                iterations += 1;
            }
        }
        Ok(Tables { tables, iterations })
    }

    fn added(&mut self, edges: &[(VertexId, VertexId, Weight)]) {
        let mut msgs: Vec<Msg> = edges.iter().map(|&(u, v, w)| (v, u, alloc::vec![w])).collect();
        let saved = core::mem::replace(&mut self.label, "notify");
        let _ = self.round(&mut msgs);
        self.label = saved;
    }
}

/// Hop-restricted Bellman-Ford from a virtual source over `sources`: in each of `h` rounds
/// the nodes whose estimate changed send it to every neighbour. Rounds with
/// no sender are counted without traffic.
pub fn clique_restricted_bf(cc: &mut Clique, sources: &[VertexId], h: u64) -> Result<Vec<Distance>, CliqueError> {
    let n = cc.n();
    for &s in sources {
        if s as usize >= n {
            return Err(GraphError::VertexOutOfRange { v: s as u64, n }.into());
        }
    }
    let g = cc.g.clone();
    let mut est: Vec<Option<Weight>> = alloc::vec![None; n];
    let mut updated = alloc::vec![false; n];
    for &s in sources {
        est[s as usize] = Some(0);
        updated[s as usize] = true;
    }
    cc.label = "bf";
    for r in 0..h {
        let mut msgs: Vec<Msg> = Vec::new();
        for u in 0..n {
            if updated[u] {
                for &(v, _) in g.neighbors(u as VertexId) {
                    msgs.push((u as VertexId, v, alloc::vec![est[u].expect("updated has estimate")]));
                }
            }
        }
        if msgs.is_empty() {
            cc.idle(h - r);
            break;
        }
        cc.round(&mut msgs)?;
        updated.iter_mut().for_each(|u| *u = false);
        for (u, v, pl) in msgs {
            let d = pl[0] + g.weight(u, v).expect("message over an edge");
            if est[v as usize].is_none_or(|e| d < e) {
                est[v as usize] = Some(d);
                updated[v as usize] = true;
            }
        }
    }
    Ok(est.into_iter().map(|d| d.map_or(Distance::Unreachable, Distance::Finite)).collect())
}

/// (2t−1)-spanner by clustering rounds: nodes announce clusters to alive
/// neighbours, decide locally, then announce decisions. Equals
/// [`crate::spanner::build_spanner`].
pub fn clique_spanner(cc: &mut Clique, t: u32, seed: u64) -> Result<Spanner, CliqueError> {
    let g = cc.g.clone();
    let n = g.n();
    let t = t.max(1);
    let p = libm::pow(n.max(2) as f64, -1.0 / t as f64);
    cc.label = "spanner";
    let mut cluster: Vec<VertexId> = (0..n as VertexId).collect();
    let mut alive: Vec<Vec<(VertexId, Weight)>> = (0..n as VertexId).map(|v| g.neighbors(v).to_vec()).collect();
    let mut keep: Vec<Edge> = Vec::new();
    // What each node has heard about its neighbours' clusters.
    let announce = |cc: &mut Clique, cluster: &[VertexId], alive: &[Vec<(VertexId, Weight)>]| -> Result<Vec<VertexId>, CliqueError> {
        let mut msgs: Vec<Msg> = Vec::new();
        for v in 0..n {
            if cluster[v] != NONE {
                msgs.extend(alive[v].iter().map(|&(x, _)| (v as VertexId, x, alloc::vec![cluster[v] as u64])));
            }
        }
        cc.round(&mut msgs)?;
        let mut heard = alloc::vec![NONE; n];
        for (u, _, pl) in msgs {
            heard[u as usize] = pl[0] as VertexId;
        }
        Ok(heard)
    };
    for round in 1..t {
        let heard = announce(cc, &cluster, &alive)?;
        let sampled = |c: VertexId| cluster_sampled(seed, round, c, p);
        let mut next = alloc::vec![NONE; n];
        let mut drops: Vec<Option<Vec<VertexId>>> = alloc::vec![Some(Vec::new()); n];
        for v in 0..n {
            if cluster[v] == NONE {
                continue;
            }
            let d = decide(cluster[v], sampled(cluster[v]), &lightest_per_cluster(&alive[v], &heard), sampled);
            keep.extend(d.add.iter().map(|&(x, w)| Edge { u: (v as VertexId).min(x), v: (v as VertexId).max(x), w }));
            next[v] = d.cluster;
            drops[v] = d.drop;
        }
        // Decision per alive edge: (new cluster, whether v drops it).
        let mut msgs: Vec<Msg> = Vec::new();
        for v in 0..n {
            for &(x, _) in &alive[v] {
                let dropped = match &drops[v] {
                    None => true,
                    Some(list) => list.binary_search(&heard[x as usize]).is_ok(),
                };
                msgs.push((v as VertexId, x, alloc::vec![next[v] as u64, dropped as u64]));
            }
        }
        cc.round(&mut msgs)?;
        let mut told: Vec<Vec<(VertexId, VertexId, bool)>> = alloc::vec![Vec::new(); n];
        for (u, x, pl) in msgs {
            told[x as usize].push((u, pl[0] as VertexId, pl[1] == 1));
        }
        for v in 0..n {
            let mine = &drops[v];
            let mut info = core::mem::take(&mut told[v]);
            info.sort_unstable();
            alive[v].retain(|&(x, _)| {
                let i = info.binary_search_by_key(&x, |e| e.0).expect("every alive neighbour reports");
                let (_, nx, theirs) = info[i];
                let own = match mine {
                    None => true,
                    Some(list) => list.binary_search(&heard[x as usize]).is_ok(),
                };
                !own && !theirs && next[v] != NONE && nx != NONE && next[v] != nx
            });
        }
        cluster = next;
    }
    let heard = announce(cc, &cluster, &alive)?;
    for v in 0..n {
        if cluster[v] != NONE {
            for (_, w, x) in lightest_per_cluster(&alive[v], &heard) {
                keep.push(Edge { u: (v as VertexId).min(x), v: (v as VertexId).max(x), w });
            }
        }
    }
    keep.sort_unstable();
    keep.dedup_by_key(|e| (e.u, e.v));
    // Both endpoints of every kept edge learn it.
    let mut msgs: Vec<Msg> = keep.iter().map(|e| (e.u, e.v, alloc::vec![e.w])).collect();
    cc.round(&mut msgs)?;
    Ok(Spanner { t, seed, edges: keep })
}

/// Result of a clique preprocessing run.
#[derive(Clone, Debug, PartialEq)]
pub struct CliqueBuild {
    pub hopset: Hopset,
    pub spanner: Option<Spanner>,
    pub retries: u32,
    pub hop: u64,
}

/// Hopset, then the Thorup-Zwick levels with pipelined per-source explorations, then
/// every node ships its sketch to the coordinator. The coordinator's oracle
/// equals the reference sketches on G ∪ H.
pub fn clique_build_oracle(cc: &mut Clique, cfg: &PipelineConfig) -> Result<CliqueBuild, CliqueError> {
    let g = cc.g.clone();
    build_on(cc, &g, cfg, None)
}

/// Spanner first, then [`clique_build_oracle`] on the spanner; certificate
/// (2t−1)(2k−1)(1+ε).
pub fn clique_build_oracle_sparsified(cc: &mut Clique, cfg: &PipelineConfig, t: u32) -> Result<CliqueBuild, CliqueError> {
    let sp = clique_spanner(cc, t, cfg.seed)?;
    let base = sp.graph(cc.n());
    build_on(cc, &base, cfg, Some(sp))
}

fn build_on(cc: &mut Clique, base: &WeightedGraph, cfg: &PipelineConfig, spanner: Option<Spanner>) -> Result<CliqueBuild, CliqueError> {
    if !base.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let n = base.n();
    cc.label = "hopset";
    let hopset = build_hopset_with(cc, base, &cfg.hopset, cfg.seed)?;
    cc.check()?;
    let aug = hopset.augment(base);
    let hop = hop_limit(hopset.beta, n);
    let mut cert = cfg.certificate()?;
    if let Some(sp) = &spanner {
        cert = cert.mul(sp.stretch()).map_err(crate::pipeline::PipelineError::from)?;
    }
    cc.label = "sketch";
    for attempt in 0..MAX_RETRIES {
        let h = hierarchy(n, cfg.k, cfg.seed, attempt)?;
        match build_sketches_with(cc, &aug, &h, hop, cfg.cap(n), cert) {
            Ok(s) => {
                cc.check()?;
                ship(cc, &s)?;
                return Ok(CliqueBuild { hopset, spanner, retries: attempt, hop });
            }
            Err(TzError::Cap(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(CliqueError::RetriesExhausted(MAX_RETRIES))
}

/// Every node streams its serialized sketch to the coordinator, `c_w` words
/// per round; the coordinator decodes what it received.
fn ship(cc: &mut Clique, s: &SketchSet) -> Result<(), CliqueError> {
    cc.label = "ship";
    let c = cc.cfg.coordinator;
    let cw = cc.cfg.c_w as usize;
    let words: Vec<Vec<u64>> = s
        .sketches
        .iter()
        .map(|sk| {
            let mut w = Vec::with_capacity(sk.words());
            sk.to_words(&mut w);
            w
        })
        .collect();
    let mut got: Vec<Vec<u64>> = alloc::vec![Vec::new(); s.n()];
    got[c as usize].clone_from(&words[c as usize]);
    let rounds = words.iter().map(|w| w.len().div_ceil(cw)).max().unwrap_or(0);
    for r in 0..rounds {
        let mut msgs: Vec<Msg> = Vec::new();
        for (v, w) in words.iter().enumerate() {
            if v as VertexId != c && r * cw < w.len() {
                msgs.push((v as VertexId, c, w[r * cw..((r + 1) * cw).min(w.len())].to_vec()));
            }
        }
        cc.round(&mut msgs)?;
        for (v, _, pl) in msgs {
            got[v as usize].extend(pl);
        }
    }
    let mut sketches = Vec::with_capacity(s.n());
    for w in &got {
        let (sk, _) = DistanceSketch::from_words(w).ok_or(TzError::SketchMismatch)?;
        sketches.push(sk);
    }
    cc.oracle = Some(SketchSet { k: s.k, seed: s.seed, hop_limit: s.hop_limit, certificate: s.certificate, sketches });
    Ok(())
}

/// Local query at the coordinator: no communication.
pub fn coordinator_query(cc: &Clique, u: VertexId, v: VertexId) -> Result<Weight, CliqueError> {
    let o = cc.oracle.as_ref().ok_or(CliqueError::NotBuilt)?;
    let n = o.n();
    for x in [u, v] {
        if x as usize >= n {
            return Err(GraphError::VertexOutOfRange { v: x as u64, n }.into());
        }
    }
    Ok(tz::query(&o.sketches[u as usize], &o.sketches[v as usize])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, hop_restricted_sssp, GraphKind};
    use crate::hopset::{build_hopset, HopsetParams};
    use crate::pipeline::{build_reference, Mode};
    use crate::ratio::Ratio;
    use crate::spanner::build_spanner;

    fn cfg(k: u32, seed: u64) -> PipelineConfig {
        PipelineConfig::new(k, Ratio::new(1, 2).unwrap(), Mode::Exact, seed).unwrap()
    }

    #[test]
    fn path_two_rounds() {
        let g = generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap();
        let mut cc = Clique::new(&g, CliqueConfig::new(0)).unwrap();
        let d = clique_restricted_bf(&mut cc, &[0], 2).unwrap();
        assert_eq!(d[2], Distance::Finite(2));
        assert_eq!(cc.metrics.rounds, 2);
        let mut cc = Clique::new(&g, CliqueConfig::new(0)).unwrap();
        clique_restricted_bf(&mut cc, &[0], 0).unwrap();
        assert_eq!(cc.metrics.messages, 0);
    }

    #[test]
    fn restricted_bf_matches_oracle() {
        let g = generate_graph(GraphKind::ErdosRenyi, 50, 0.1, 30, 2).unwrap();
        for s in [0, 7, 49] {
            for h in [1, 2, 4, 60] {
                let mut cc = Clique::new(&g, CliqueConfig::new(0)).unwrap();
                let d = clique_restricted_bf(&mut cc, &[s], h).unwrap();
                assert_eq!(d, hop_restricted_sssp(&g, s, h).dist);
                assert_eq!(cc.metrics.rounds, h);
            }
        }
    }

    #[test]
    fn duplicate_pair_is_a_violation() {
        let g = generate_graph(GraphKind::Path, 3, 0.0, 1, 0).unwrap();
        let mut cc = Clique::new(&g, CliqueConfig::new(0)).unwrap();
        let mut msgs = alloc::vec![(0, 1, alloc::vec![1]), (0, 1, alloc::vec![2])];
        assert!(matches!(cc.round(&mut msgs), Err(CliqueError::BudgetViolation { .. })));
        let mut msgs = alloc::vec![(0, 1, alloc::vec![1, 2, 3])];
        assert!(matches!(cc.round(&mut msgs), Err(CliqueError::PayloadTooLarge { .. })));
    }

    #[test]
    fn oracle_equals_reference() {
        for (n, d, k, seed) in [(60, 0.15, 2, 2u64), (40, 0.2, 1, 1), (50, 0.2, 3, 5)] {
            let g = generate_graph(GraphKind::ErdosRenyi, n, d, 20, seed).unwrap();
            let c = cfg(k, seed);
            let mut cc = Clique::new(&g, CliqueConfig::new(seed)).unwrap();
            assert!(matches!(coordinator_query(&cc, 0, 1), Err(CliqueError::NotBuilt)));
            let b = clique_build_oracle(&mut cc, &c).unwrap();
            let r = build_reference(&g, &c).unwrap();
            assert_eq!(cc.oracle(), Some(&r.sketches), "n={n} k={k}");
            assert_eq!(b.retries, r.retries);
            let before = cc.metrics.rounds;
            assert_eq!(coordinator_query(&cc, 3, 3).unwrap(), 0);
            assert_eq!(coordinator_query(&cc, 3, 9).unwrap(), r.sketches.query(3, 9).unwrap());
            assert_eq!(cc.metrics.rounds, before);
            assert!(cc.metrics.phase("ship").rounds > 0);
        }
    }

    #[test]
    fn hopset_matches_sequential() {
        let g = generate_graph(GraphKind::ErdosRenyi, 60, 0.1, 40, 3).unwrap();
        let half = Ratio::new(1, 2).unwrap();
        let mut p = HopsetParams::new(2, half, half);
        p.beta_override = Some(2);
        let seq = build_hopset(&g, &p, 3).unwrap();
        assert!(!seq.is_empty());
        let mut cc = Clique::new(&g, CliqueConfig::new(3)).unwrap();
        assert_eq!(build_hopset_with(&mut cc, &g, &p, 3).unwrap(), seq);
        assert!(cc.metrics.phase("notify").messages > 0);
    }

    #[test]
    fn spanner_matches_sequential() {
        let g = generate_graph(GraphKind::ErdosRenyi, 80, 0.2, 20, 4).unwrap();
        for t in 1..=4 {
            let mut cc = Clique::new(&g, CliqueConfig::new(0)).unwrap();
            assert_eq!(clique_spanner(&mut cc, t, 9).unwrap(), build_spanner(&g, t, 9), "t={t}");
        }
    }

    #[test]
    fn sparsification_saves_messages() {
        let g = generate_graph(GraphKind::ErdosRenyi, 120, 0.5, 20, 2).unwrap();
        let c = cfg(2, 2);
        let mut direct = Clique::new(&g, CliqueConfig::new(2)).unwrap();
        clique_build_oracle(&mut direct, &c).unwrap();
        let mut sparse = Clique::new(&g, CliqueConfig::new(2)).unwrap();
        let b = clique_build_oracle_sparsified(&mut sparse, &c, 2).unwrap();
        assert!(sparse.metrics.messages < direct.metrics.messages);
        let cert = c.certificate().unwrap().mul(b.spanner.unwrap().stretch()).unwrap();
        assert_eq!(sparse.oracle().unwrap().certificate, cert);
    }
}
