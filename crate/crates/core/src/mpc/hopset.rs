//! Hopset construction on the vertex layout: every phase is one
//! single-label superclustering run and one capped multi-source
//! interconnection run, and the edges a phase finds are folded into the
//! tuples before the next phase explores.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::bf::{Explorer, Relax, Run, VertexData, NONE};
use super::sim::SimError;
use crate::explore::Entry;
use crate::graph::{VertexId, Weight, WeightedGraph};
use crate::hopset::{
    hopbound, insert_edge, make_schedule, overlap_budget, sampled, scale_range, scale_seed, EdgeKind, HopEdge, Hopset,
    HopsetError, HopsetParams, PhaseTrace, ThresholdSchedule, MAX_RETRIES,
};
use crate::pipeline::PipelineError;

const LABEL: &str = "hopset";

/// Hopset of the graph loaded in `ex`, equal to
/// [`crate::hopset::build_hopset`] on `g` under the same seed. Returns the
/// explorer over G ∪ H. `groups` replicas let interconnection sources
/// advance together (`None`: all that fit).
pub fn mpc_build_hopset<X: VertexData>(
    mut ex: Explorer<X>,
    g: &WeightedGraph,
    p: &HopsetParams,
    seed: u64,
    groups: Option<u64>,
) -> Result<(Explorer<X>, Hopset), PipelineError> {
    let n = g.n();
    let warnings = p.validate(n)?;
    let beta = hopbound(p, n)?;
    let mut out = Hopset { n, beta, params: *p, edges: Vec::new(), scales: Vec::new(), retries: 0, warnings, trace: Vec::new() };
    if n <= 1 || g.m() == 0 {
        return Ok((ex, out));
    }
    let hops = out.exploration_hops();
    let mut all: BTreeMap<(VertexId, VertexId), HopEdge> = BTreeMap::new();
    // Checkpoint of G ∪ H_lower for reseeded attempts.
    let mut lower = g.clone();
    for scale in scale_range(n, g.max_weight(), beta) {
        let schedule = make_schedule(p, n, scale)?;
        let mut attempt = 0;
        let edges = loop {
            let mut tr = Vec::new();
            let (next, res) = build_scale(ex, &schedule, p, n, hops, scale_seed(seed, scale, attempt), groups, &mut tr)?;
            match res {
                Ok(e) => {
                    ex = next;
                    out.trace.extend(tr);
                    break e;
                }
                Err(e) if attempt + 1 >= MAX_RETRIES => return Err(e.into()),
                Err(_) => {
                    attempt += 1;
                    out.retries += 1;
                    ex = restore(next, &lower, groups)?;
                }
            }
        };
        if !edges.is_empty() {
            lower = lower.union(edges.iter().map(|e| (e.u, e.v, e.w)));
        }
        for e in edges {
            insert_edge(&mut all, e);
        }
        out.scales.push(scale);
    }
    out.edges = all.into_values().collect();
    Ok((ex, out))
}

fn restore<X: VertexData>(ex: Explorer<X>, lower: &WeightedGraph, groups: Option<u64>) -> Result<Explorer<X>, SimError> {
    let metrics = ex.sim.metrics().clone();
    let mut fresh = Explorer::build(ex.sim.config().clone(), lower, groups, LABEL)?;
    fresh.sim.absorb_metrics(&metrics);
    Ok(fresh)
}

type ScaleResult<X> = (Explorer<X>, Result<Vec<HopEdge>, HopsetError>);

#[allow(clippy::too_many_arguments)]
fn build_scale<X: VertexData>(
    mut ex: Explorer<X>,
    schedule: &ThresholdSchedule,
    p: &HopsetParams,
    n: usize,
    hops: u64,
    seed: u64,
    groups: Option<u64>,
    trace: &mut Vec<PhaseTrace>,
) -> Result<ScaleResult<X>, SimError> {
    let scale = schedule.scale;
    let mut found: BTreeMap<(VertexId, VertexId), HopEdge> = BTreeMap::new();
    // Active centers are a function of the coins: sampled in every earlier
    // phase of this scale.
    let mut active = alloc::vec![true; n];
    for ph in &schedule.phases {
        let mut new_edges = Vec::new();
        let mut unclustered = alloc::vec![false; n];
        if ph.interconnect_only {
            unclustered.copy_from_slice(&active);
            active.iter_mut().for_each(|a| *a = false);
        } else {
            let is_sampled: Vec<bool> = (0..n).map(|v| active[v] && sampled(seed, scale, ph, p, v as VertexId)).collect();
            let delta = ph.delta;
            let rule = Relax(move |_: u64, d: u64| d <= delta);
            let run = Run { h: hops, cap: usize::MAX, rule: &rule, groups: 1, label: LABEL };
            ex.run(&run, |v, _| {
                let seeds = if is_sampled[v as usize] { alloc::vec![Entry { key: 0, dist: 0, tag: v }] } else { Vec::new() };
                (NONE, seeds)
            })?;
            let mut labels = alloc::vec![None; n];
            ex.at_roots(|v, _, t| labels[v as usize] = t.first().map(|e| (e.dist, e.tag)))?;
            for c in 0..n {
                if !active[c] || is_sampled[c] {
                    continue;
                }
                match labels[c] {
                    Some((d, r)) => new_edges.push(HopEdge { u: r, v: c as VertexId, w: d, scale, phase: ph.index, kind: EdgeKind::Super }),
                    None => unclustered[c] = true,
                }
            }
            active = is_sampled;
        }
        let budget = overlap_budget(p, n, ph);
        let delta = ph.delta;
        let rule = Relax(move |_: u64, d: u64| 2 * d <= delta);
        let run = Run { h: hops, cap: budget, rule: &rule, groups: groups.unwrap_or(u64::MAX), label: LABEL };
        let (_, verdict) = ex.run(&run, |v, _| {
            let seeds = if unclustered[v as usize] { alloc::vec![Entry { key: v, dist: 0, tag: v }] } else { Vec::new() };
            (NONE, seeds)
        })?;
        if let Some(e) = verdict {
            let err = HopsetError::OverlapBudgetExceeded { scale, phase: ph.index, vertex: e.vertex, count: e.admitted, budget };
            return Ok((ex, Err(err)));
        }
        let mut counts = alloc::vec![0u32; n];
        ex.at_roots(|v, _, t| {
            counts[v as usize] = t.len() as u32;
            if unclustered[v as usize] {
                for e in t.iter().filter(|e| e.key < v) {
                    new_edges.push(HopEdge { u: e.key, v, w: e.dist, scale, phase: ph.index, kind: EdgeKind::Inter });
                }
            }
        })?;
        trace.push(PhaseTrace { scale, phase: ph.index, budget, counts });
        if !new_edges.is_empty() {
            let mut at: BTreeMap<VertexId, Vec<(VertexId, Weight)>> = BTreeMap::new();
            for e in &new_edges {
                at.entry(e.v).or_default().push((e.u, e.w));
            }
            ex = ex.rebuild(true, |v, _| at.remove(&v).unwrap_or_default(), groups, LABEL)?;
        }
        for e in new_edges {
            insert_edge(&mut found, e);
        }
    }
    Ok((ex, Ok(found.into_values().collect())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};
    use crate::hopset::{build_hopset, dump};
    use crate::mpc::tuples::graph_config;
    use crate::ratio::Ratio;

    fn params(beta: u64) -> HopsetParams {
        let half = Ratio::new(1, 2).unwrap();
        let mut p = HopsetParams::new(2, half, half);
        p.beta_override = Some(beta);
        p
    }

    fn mpc(g: &WeightedGraph, p: &HopsetParams, seed: u64, alpha: u64) -> Hopset {
        let mut c = graph_config(g, Ratio::new(1, 2).unwrap()).unwrap();
        c.c_slack = 200;
        c.extra_factor = alpha;
        c.min_machines *= 3;
        let groups = if alpha > 1 { None } else { Some(1) };
        let ex: Explorer<()> = Explorer::build(c, g, groups, "tuples").unwrap();
        let (ex, h) = mpc_build_hopset(ex, g, p, seed, groups).unwrap();
        assert_eq!(ex.sim.metrics().violations, 0);
        h
    }

    #[test]
    fn path_dump_matches_sequential() {
        let g = generate_graph(GraphKind::Path, 64, 0.0, 1, 0).unwrap();
        let p = params(8);
        let seq = build_hopset(&g, &p, 1).unwrap();
        assert!(!seq.is_empty());
        let h = mpc(&g, &p, 1, 1);
        assert_eq!(dump(&h), dump(&seq));
        assert_eq!(h, seq);
    }

    #[test]
    fn random_graphs_match_sequential() {
        for (n, d, beta, seed) in [(80, 0.06, 3, 4u64), (60, 0.1, 2, 7)] {
            let g = generate_graph(GraphKind::ErdosRenyi, n, d, 40, seed).unwrap();
            let p = params(beta);
            let seq = build_hopset(&g, &p, seed).unwrap();
            assert!(!seq.is_empty());
            assert_eq!(mpc(&g, &p, seed, 1), seq, "n={n}");
            assert_eq!(mpc(&g, &p, seed, 3), seq, "striped n={n}");
        }
    }

    #[test]
    fn retries_match_sequential() {
        let g = generate_graph(GraphKind::ErdosRenyi, 60, 0.1, 40, 3).unwrap();
        let mut p = params(2);
        let mut hit = false;
        for c_ov in (2..30).map(|i| i as f64 / 20.0) {
            p.c_ov = c_ov;
            let seq = build_hopset(&g, &p, 3);
            if matches!(&seq, Ok(h) if h.retries > 0) {
                assert_eq!(mpc(&g, &p, 3, 1), seq.unwrap());
                hit = true;
                break;
            }
        }
        assert!(hit, "no budget forces a reseed");
    }

    #[test]
    fn large_beta_is_empty() {
        let g = generate_graph(GraphKind::ErdosRenyi, 50, 0.1, 10, 1).unwrap();
        let half = Ratio::new(1, 2).unwrap();
        let p = HopsetParams::new(2, half, half);
        let h = mpc(&g, &p, 1, 1);
        assert!(h.is_empty() && h.scales.is_empty());
    }
}
