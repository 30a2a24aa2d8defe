//! Sketch and SSSP pipelines executed in the simulator. Each mode composes
//! the tuple layout, an optional spanner, the hopset and level-by-level
//! explorations; results equal [`crate::pipeline::build_reference`].

use alloc::vec::Vec;

use super::bf::{Explorer, Relax, Run, NONE};
use super::hopset::mpc_build_hopset;
use super::sim::{MachineId, Metrics, SimConfig, Store, HEADER_WORDS};
use super::spanner::{mpc_spanner, Clustering};
use super::tuples::{graph_config, Geometry};
use crate::explore::Entry;
use crate::graph::{Distance, DistanceVector, GraphError, VertexId, Weight, WeightedGraph, INF};
use crate::hopset::{Hopset, MAX_RETRIES};
use crate::pipeline::{hierarchy, hop_limit, Mode, PipelineConfig, PipelineError};
use crate::spanner::Spanner;
use crate::tz::{self, BunchEntry, DistanceSketch, LevelHierarchy, Pivot, SketchSet, TzError};

/// Sketch state at the root of a vertex.
#[derive(Default, Debug)]
pub struct TzData {
    pub pivots: Vec<Option<Pivot>>,
    pub bunch: Vec<BunchEntry>,
    label: Option<(u64, u32)>,
    thr: u64,
}

impl Store for TzData {
    fn words(&self) -> u64 {
        3 + 2 * self.pivots.len() as u64 + 3 * self.bunch.len() as u64 + 3
    }
}

/// Machine holding each vertex's sketch: the group-0 root r_v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchPlacement {
    pub machines: Vec<MachineId>,
}

/// A finished distributed build. The explorer keeps the sketches resident
/// for [`query_two_rounds`].
pub struct MpcBuild {
    pub sketches: SketchSet,
    pub placement: SketchPlacement,
    pub base_m: usize,
    pub spanner: Option<Spanner>,
    pub hopset: Hopset,
    pub hop: u64,
    pub retries: u32,
    /// Replica groups the explorations striped over.
    pub groups: u64,
    pub explorer: Explorer<TzData>,
}

impl MpcBuild {
    pub fn metrics(&self) -> &Metrics {
        self.explorer.sim.metrics()
    }
}

/// Machine pool for `g` under `cfg`: S at least the sketch floor, and room
/// for the hopset edges the layout will absorb.
pub fn sim_config(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<SimConfig, PipelineError> {
    let n = g.n();
    let mut c = graph_config(g, cfg.gamma)?;
    c.c_slack = cfg.c_slack;
    c.s_min = c.s_min.max(cfg.s_floor(n));
    c.seed = cfg.seed;
    c.strict_io = cfg.strict_io;
    c.extra_factor = if cfg.mode == Mode::Exact { 1 } else { cfg.extra_factor.max(1) };
    let geo = Geometry::new(c.words_per_machine())?;
    let rho = 1.0 / cfg.hopset.kappa as f64;
    let h = libm::ceil(libm::pow(n.max(2) as f64, 1.0 + rho)) as u64;
    c.min_machines = 2 * n as u64 + (2 * (g.m() as u64 + h)).div_ceil(geo.l);
    Ok(c)
}

/// Distributed sketch build in `cfg.mode`.
pub fn mpc_build_sketches(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<MpcBuild, PipelineError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let n = g.n();
    let (ex, spanner, base) = augmented_layout(g, cfg)?;
    let (mut ex, hopset): (Explorer<TzData>, Hopset) = {
        let groups = if cfg.mode == Mode::Exact { Some(1) } else { None };
        mpc_build_hopset(ex, &base, &cfg.hopset, cfg.seed, groups)?
    };
    let hop = hop_limit(hopset.beta, n);
    let cert = cfg.certificate()?;
    for attempt in 0..MAX_RETRIES {
        let h = hierarchy(n, cfg.k, cfg.seed, attempt)?;
        match tz_levels(&mut ex, &h, hop, cfg.cap(n))? {
            Ok(()) => {
                let mut pivots = alloc::vec![Vec::new(); n];
                let mut bunch = alloc::vec![Vec::new(); n];
                ex.at_roots(|v, x, _| {
                    pivots[v as usize] = x.pivots.clone();
                    bunch[v as usize] = x.bunch.clone();
                })?;
                let sketches = tz::assemble(&h, Some(hop), cert, pivots, bunch);
                ex.at_roots(|v, x, _| x.bunch.clone_from(&sketches.sketches[v as usize].bunch))?;
                let placement = SketchPlacement { machines: ex.roots() };
                let groups = ex.layout.groups;
                return Ok(MpcBuild { sketches, placement, base_m: base.m(), spanner, hopset, hop, retries: attempt, groups, explorer: ex });
            }
            Err(_) => continue,
        }
    }
    Err(PipelineError::RetriesExhausted(MAX_RETRIES))
}

/// Layout of the hopset's input graph: G, or the spanner of G rebuilt in
/// place for `Polylog`, where the space freed by sparsification becomes
/// replica groups.
fn augmented_layout<X: super::bf::VertexData>(
    g: &WeightedGraph,
    cfg: &PipelineConfig,
) -> Result<(Explorer<X>, Option<Spanner>, WeightedGraph), PipelineError> {
    let sc = sim_config(g, cfg)?;
    match cfg.mode {
        Mode::Exact => {
            let mut ex = Explorer::build(sc, g, Some(1), "tuples")?;
            ex.narrow();
            Ok((ex, None, g.clone()))
        }
        Mode::Extra => Ok((Explorer::build(sc, g, None, "tuples")?, None, g.clone())),
        Mode::Polylog => {
            cfg.check_density(g)?;
            let mut ex: Explorer<Clustering> = Explorer::build(sc, g, Some(1), "tuples")?;
            let (sp, _) = mpc_spanner(&mut ex, g.n(), cfg.spanner_t(), cfg.seed)?;
            let ex = ex.rebuild(false, |_, x| x.adds.clone(), None, "tuples")?;
            let base = sp.graph(g.n());
            Ok((ex, Some(sp), base))
        }
    }
}

/// Levels k−1..0: pivots by one single-label run, then the bunch-filtered
/// keyed run from A_i∖A_{i+1}. An inner `Err` is an admission-cap rejection.
fn tz_levels(
    ex: &mut Explorer<TzData>,
    h: &LevelHierarchy,
    hop: u64,
    cap: usize,
) -> Result<Result<(), crate::explore::CapExceeded>, PipelineError> {
    let k = h.k();
    ex.at_roots(|_, x, _| {
        *x = TzData { pivots: alloc::vec![None; k as usize], bunch: Vec::new(), label: None, thr: INF };
    })?;
    let groups = ex.layout.groups;
    for i in (0..k).rev() {
        let any = Relax(|_: u64, _: u64| true);
        let run = Run { h: hop, cap: usize::MAX, rule: &any, groups: 1, label: "tz" };
        ex.run(&run, |v, _| {
            let seeds = if h.contains(i, v) { alloc::vec![Entry { key: 0, dist: 0, tag: v }] } else { Vec::new() };
            (NONE, seeds)
        })?;
        ex.at_roots(|_, x, t| x.label = t.first().map(|e| (e.dist, e.tag)))?;
        let below = Relax(|thr: u64, d: u64| d < thr);
        let run = Run { h: hop, cap, rule: &below, groups, label: "tz" };
        let (_, verdict) = ex.run(&run, |v, x| {
            let seeds = if h.contains(i, v) && !h.contains(i + 1, v) {
                alloc::vec![Entry { key: v, dist: 0, tag: v }]
            } else {
                Vec::new()
            };
            (x.thr, seeds)
        })?;
        if let Some(e) = verdict {
            return Ok(Err(e));
        }
        ex.at_roots(|_, x, t| {
            x.bunch.extend(t.iter().map(|e| BunchEntry { id: e.key, level: i as u8, dist: e.dist }));
            x.pivots[i as usize] = x.label.map(|(d, id)| Pivot { id, dist: d });
            x.thr = x.label.map_or(INF, |l| l.0);
        })?;
    }
    Ok(Ok(()))
}

/// Distributed approximate SSSP: one hop-limited run from `s` on the
/// hopset-augmented base graph.
pub fn mpc_sssp(g: &WeightedGraph, cfg: &PipelineConfig, s: VertexId) -> Result<(DistanceVector, Metrics), PipelineError> {
    let n = g.n();
    if s as usize >= n {
        return Err(GraphError::VertexOutOfRange { v: s as u64, n }.into());
    }
    let (ex, _, base) = augmented_layout(g, cfg)?;
    let groups = if cfg.mode == Mode::Exact { Some(1) } else { None };
    let (mut ex, hopset): (Explorer<()>, Hopset) = mpc_build_hopset(ex, &base, &cfg.hopset, cfg.seed, groups)?;
    let any = Relax(|_: u64, _: u64| true);
    let run = Run { h: hop_limit(hopset.beta, n), cap: usize::MAX, rule: &any, groups: 1, label: "sssp" };
    ex.run(&run, |v, _| {
        let seeds = if v == s { alloc::vec![Entry { key: 0, dist: 0, tag: v }] } else { Vec::new() };
        (NONE, seeds)
    })?;
    let mut dist = alloc::vec![Distance::Unreachable; n];
    ex.at_roots(|v, _, t| {
        if let Some(e) = t.first() {
            dist[v as usize] = Distance::Finite(e.dist);
        }
    })?;
    Ok((DistanceVector { source: s, dist }, ex.sim.metrics().clone()))
}

/// Answer (u, v) from machine `at`: one round of fetch requests to r_u and
/// r_v, one round of full-sketch replies, then the local query.
pub fn query_two_rounds(
    b: &mut MpcBuild,
    at: MachineId,
    u: VertexId,
    v: VertexId,
) -> Result<(Weight, u64), PipelineError> {
    let n = b.sketches.n();
    for x in [u, v] {
        if x as usize >= n {
            return Err(GraphError::VertexOutOfRange { v: x as u64, n }.into());
        }
    }
    let ex = &mut b.explorer;
    let limit = ex.sim.s() - HEADER_WORDS;
    for x in [u, v] {
        let words = b.sketches.sketches[x as usize].words() as u64;
        if words > limit {
            return Err(PipelineError::SketchTooLargeForPayload { words, limit });
        }
    }
    let start = ex.sim.rounds();
    let (ru, rv) = (b.placement.machines[u as usize], b.placement.machines[v as usize]);
    ex.sim.run_round("query", |m, _, _, out| {
        if m == at {
            out.send(ru, alloc::vec![u as u64]);
            out.send(rv, alloc::vec![v as u64]);
        }
    })?;
    ex.sim.run_round("query", |_, st, inbox, out| {
        for msg in inbox {
            let s = DistanceSketch { owner: st.vertex as VertexId, pivots: st.data.pivots.clone(), bunch: st.data.bunch.clone() };
            let mut pl = Vec::with_capacity(s.words());
            s.to_words(&mut pl);
            out.send(msg.src, pl);
        }
    })?;
    let mut got: Vec<DistanceSketch> = Vec::new();
    ex.sim.local_step(|m, _, inbox| {
        if m == at {
            for msg in inbox {
                if let Some((s, _)) = DistanceSketch::from_words(&msg.payload) {
                    got.push(s);
                }
            }
        }
    })?;
    let rounds = ex.sim.rounds() - start;
    let find = |x: VertexId| got.iter().find(|s| s.owner == x).ok_or(TzError::Unresolved(u, v));
    let d = tz::query(find(u)?, find(v)?)?;
    Ok((d, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{exact_sssp, generate_graph, GraphKind};
    use crate::pipeline::{build_reference, sssp_certificate, sssp_reference};
    use crate::ratio::Ratio;

    fn cfg(k: u32, mode: Mode, seed: u64) -> PipelineConfig {
        PipelineConfig::new(k, Ratio::new(1, 2).unwrap(), mode, seed).unwrap()
    }

    #[test]
    fn exact_mode_matches_reference() {
        for (n, d, k, seed) in [(60, 0.1, 2, 6u64), (50, 0.15, 1, 2), (70, 0.08, 3, 4)] {
            let g = generate_graph(GraphKind::ErdosRenyi, n, d, 20, seed).unwrap();
            let c = cfg(k, Mode::Exact, seed);
            let r = build_reference(&g, &c).unwrap();
            let b = mpc_build_sketches(&g, &c).unwrap();
            assert_eq!(b.metrics().violations, 0);
            assert_eq!(b.sketches, r.sketches, "n={n} k={k}");
            assert_eq!(b.hopset, r.hopset);
            assert_eq!(b.retries, r.retries);
        }
    }

    #[test]
    fn extra_mode_matches_reference() {
        let g = generate_graph(GraphKind::ErdosRenyi, 80, 0.1, 20, 3).unwrap();
        let c = cfg(2, Mode::Extra, 3);
        let b = mpc_build_sketches(&g, &c).unwrap();
        assert!(b.groups > 1);
        assert_eq!(b.sketches, build_reference(&g, &c).unwrap().sketches);
    }

    #[test]
    fn polylog_mode_matches_reference() {
        let g = generate_graph(GraphKind::ErdosRenyi, 100, 0.5, 20, 8).unwrap();
        let c = cfg(2, Mode::Polylog, 8);
        let r = build_reference(&g, &c).unwrap();
        let b = mpc_build_sketches(&g, &c).unwrap();
        assert_eq!(b.spanner, r.spanner);
        assert_eq!(b.sketches, r.sketches);
    }

    #[test]
    fn placement_is_the_root() {
        let g = generate_graph(GraphKind::Grid, 36, 0.0, 5, 1).unwrap();
        let mut b = mpc_build_sketches(&g, &cfg(2, Mode::Exact, 1)).unwrap();
        let stores = b.explorer.sim.stores();
        for (v, &m) in b.placement.machines.iter().enumerate() {
            assert!(stores[m as usize].root && stores[m as usize].vertex == v as u64);
        }
        for (u, v) in [(0, 0), (3, 30), (35, 1)] {
            let (d, rounds) = query_two_rounds(&mut b, 7, u, v).unwrap();
            assert_eq!(rounds, 2);
            assert_eq!(d, b.sketches.query(u, v).unwrap());
        }
    }

    #[test]
    fn oversized_sketch_is_rejected() {
        let g = generate_graph(GraphKind::ErdosRenyi, 40, 0.2, 5, 1).unwrap();
        let mut b = mpc_build_sketches(&g, &cfg(1, Mode::Exact, 1)).unwrap();
        b.sketches.sketches[0].bunch = alloc::vec![BunchEntry { id: 0, level: 0, dist: 0 }; 1 << 16];
        assert!(matches!(query_two_rounds(&mut b, 0, 0, 1), Err(PipelineError::SketchTooLargeForPayload { .. })));
    }

    #[test]
    fn sssp_matches_reference() {
        let g = generate_graph(GraphKind::ErdosRenyi, 90, 0.1, 50, 3).unwrap();
        for mode in [Mode::Exact, Mode::Extra] {
            let c = cfg(2, mode, 3);
            let (d, m) = mpc_sssp(&g, &c, 0).unwrap();
            assert_eq!(m.violations, 0);
            assert_eq!(d, sssp_reference(&g, &c, 0).unwrap());
            let e = exact_sssp(&g, 0);
            let cert = sssp_certificate(&c).unwrap();
            for v in 0..90 {
                let (a, t) = (d.dist[v].finite().unwrap(), e.dist[v].finite().unwrap());
                assert!(t <= a && cert.bounds(a, t));
            }
        }
    }
}
