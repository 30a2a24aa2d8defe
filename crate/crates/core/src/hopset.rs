//! Elkin–Neiman (β, ε)-hopsets: per distance scale, superclustering and
//! interconnection phases over hop-truncated explorations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coin;
use crate::explore::{Entry, Executor, Sequential};
use crate::graph::{oracle, VertexId, Weight, WeightedGraph, INF};
use crate::ratio::Ratio;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HopsetError {
    #[error("invalid hopset parameters: {0}")]
    InvalidParams(&'static str),
    #[error("hopbound exceeds 2^40")]
    Overflow,
    #[error("scale {scale} phase {phase}: vertex {vertex} visited by {count} explorations, budget {budget}")]
    OverlapBudgetExceeded { scale: u32, phase: u32, vertex: VertexId, count: usize, budget: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopsetParams {
    pub kappa: u32,
    pub rho: Ratio,
    pub eps: Ratio,
    pub c_beta: Ratio,
    /// Cluster overlap budget constant.
    pub c_ov: f64,
    /// Numerator of the second-stage phase count ⌈c/ρ⌉.
    pub stage2: u64,
    pub allow_large_kappa: bool,
    /// Sampling probability forced to zero: every phase only interconnects.
    pub no_sampling: bool,
    pub beta_override: Option<u64>,
}

pub const MAX_RETRIES: u32 = 5;

impl HopsetParams {
    pub fn new(kappa: u32, rho: Ratio, eps: Ratio) -> HopsetParams {
        HopsetParams {
            kappa,
            rho,
            eps,
            c_beta: Ratio::ONE,
            c_ov: 4.0,
            stage2: 2,
            allow_large_kappa: true,
            no_sampling: false,
            beta_override: None,
        }
    }

    /// Returns warnings that do not prevent a build.
    pub fn validate(&self, n: usize) -> Result<Vec<&'static str>, HopsetError> {
        let mut warn = Vec::new();
        if self.kappa < 2 {
            return Err(HopsetError::InvalidParams("kappa must be at least 2"));
        }
        let inv_k = Ratio::new(1, self.kappa as u64).expect("kappa > 0");
        if self.rho < inv_k || self.rho > Ratio::new(1, 2).expect("const") {
            return Err(HopsetError::InvalidParams("rho must lie in [1/kappa, 1/2]"));
        }
        if self.eps == Ratio::ZERO || self.eps >= Ratio::ONE {
            return Err(HopsetError::InvalidParams("eps must lie in (0, 1)"));
        }
        if (self.kappa as f64) > libm::log2(n.max(2) as f64) / 4.0 {
            if !self.allow_large_kappa {
                return Err(HopsetError::InvalidParams("kappa exceeds log2(n)/4"));
            }
            warn.push("kappa exceeds log2(n)/4");
        }
        Ok(warn)
    }
}

/// β = ⌈C_β·((ln n / ε)·(log2 κ + 1/ρ))^{⌈log2 κ⌉ + ⌈1/ρ⌉}⌉.
pub fn hopbound(p: &HopsetParams, n: usize) -> Result<u64, HopsetError> {
    if let Some(b) = p.beta_override {
        return Ok(b);
    }
    let base = libm::log(n.max(1) as f64) / p.eps.to_f64()
        * (libm::log2(p.kappa as f64) + p.rho.recip().map_err(|_| HopsetError::Overflow)?.to_f64());
    let expo = Ratio::integer(p.kappa as u64).ceil_log2() as f64
        + p.rho.recip().map_err(|_| HopsetError::Overflow)?.ceil() as f64;
    let beta = libm::ceil(p.c_beta.to_f64() * libm::pow(base, expo));
    if beta.is_nan() || beta > (1u64 << 40) as f64 {
        return Err(HopsetError::Overflow);
    }
    Ok((beta as u64).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    /// 1-based.
    pub index: u32,
    pub delta: Weight,
    pub deg: f64,
    pub r: Weight,
    pub interconnect_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSchedule {
    pub scale: u32,
    pub exponential_phases: u32,
    pub phases: Vec<Phase>,
}

impl ThresholdSchedule {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// ℓ = ⌈log2(κρ)⌉ + ⌈c/ρ⌉ + 1 phases. The first term of δ_i is ceiled and
/// the recurrence on R kept in integers, so Σ_{i<j} δ_i = R_j exactly.
pub fn make_schedule(p: &HopsetParams, n: usize, scale: u32) -> Result<ThresholdSchedule, HopsetError> {
    let kr = Ratio::integer(p.kappa as u64).mul(p.rho).map_err(|_| HopsetError::Overflow)?;
    let l1 = kr.ceil_log2();
    let l2 = Ratio::integer(p.stage2).mul(p.rho.recip().map_err(|_| HopsetError::Overflow)?)
        .map_err(|_| HopsetError::Overflow)?
        .ceil() as u32;
    let ell = l1 + l2 + 1;
    let n_f = n.max(2) as f64;
    let mut phases = Vec::with_capacity(ell as usize);
    let mut r: u128 = 0;
    for i in 1..=ell {
        let e = ell - i;
        let num = (p.eps.num() as u128)
            .checked_pow(e)
            .and_then(|x| x.checked_mul(1u128 << (scale + 1).min(100)))
            .ok_or(HopsetError::Overflow)?;
        let den = (p.eps.den() as u128).checked_pow(e).ok_or(HopsetError::Overflow)?;
        let delta = num.div_ceil(den) + 4 * r;
        if delta > u64::MAX as u128 / 4 {
            return Err(HopsetError::Overflow);
        }
        let deg = if i <= l1 {
            libm::pow(n_f, (1u64 << (i - 1)) as f64 / p.kappa as f64)
        } else {
            libm::pow(n_f, p.rho.to_f64())
        };
        phases.push(Phase { index: i, delta: delta as u64, deg, r: r as u64, interconnect_only: i == ell });
        r += delta;
    }
    Ok(ThresholdSchedule { scale, exponential_phases: l1, phases })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Super,
    Inter,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Super => "super",
            EdgeKind::Inter => "inter",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HopEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: Weight,
    pub scale: u32,
    pub phase: u32,
    pub kind: EdgeKind,
}

/// Per-vertex interconnection visit counts of one phase.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrace {
    pub scale: u32,
    pub phase: u32,
    pub budget: usize,
    pub counts: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hopset {
    pub n: usize,
    pub beta: u64,
    pub params: HopsetParams,
    /// Sorted by (u, v), u < v, minimum weight per pair.
    pub edges: Vec<HopEdge>,
    pub scales: Vec<u32>,
    pub retries: u32,
    pub warnings: Vec<&'static str>,
    pub trace: Vec<PhaseTrace>,
}

impl Hopset {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn augment(&self, g: &WeightedGraph) -> WeightedGraph {
        g.union(self.edges.iter().map(|e| (e.u, e.v, e.w)))
    }

    /// Hop limit of explorations that build the hopset.
    pub fn exploration_hops(&self) -> u64 {
        2 * self.beta + 1
    }
}

/// Scales ⌈log2 β⌉ ..= ⌈log2(n·W_max)⌉ (empty when β already covers every
/// distance).
pub fn scale_range(n: usize, w_max: Weight, beta: u64) -> core::ops::RangeInclusive<u32> {
    let ceil_log2 = |x: u128| -> u32 {
        let mut j = 0;
        while (1u128 << j) < x {
            j += 1;
        }
        j
    };
    let lo = ceil_log2(beta.max(1) as u128);
    let hi = ceil_log2((n as u128 * w_max as u128).max(1));
    lo..=hi
}

pub(crate) fn phase_stream(scale: u32, phase: u32) -> u64 {
    coin::stream::HOPSET + ((scale as u64) << 16) + phase as u64
}

pub fn sampled(seed: u64, scale: u32, phase: &Phase, p: &HopsetParams, center: VertexId) -> bool {
    !p.no_sampling && coin::bernoulli(seed, phase_stream(scale, phase.index), center as u64, 1.0 / phase.deg)
}

pub fn overlap_budget(p: &HopsetParams, n: usize, phase: &Phase) -> usize {
    libm::ceil(p.c_ov * phase.deg * libm::log(n.max(2) as f64)) as usize
}

pub(crate) fn insert_edge(map: &mut BTreeMap<(VertexId, VertexId), HopEdge>, e: HopEdge) {
    let key = (e.u.min(e.v), e.u.max(e.v));
    let e = HopEdge { u: key.0, v: key.1, ..e };
    map.entry(key).and_modify(|c| if e.w < c.w { *c = e }).or_insert(e);
}

/// One distance scale over `lower` = G ∪ H_lower. Edges found in a phase
/// join the exploration graph from the next phase on.
pub fn build_scale(
    lower: &WeightedGraph,
    p: &HopsetParams,
    schedule: &ThresholdSchedule,
    hops: u64,
    seed: u64,
    trace: Option<&mut Vec<PhaseTrace>>,
) -> Result<Vec<HopEdge>, HopsetError> {
    build_scale_with(&mut Sequential, lower, p, schedule, hops, seed, trace)
}

/// [`build_scale`] on any executor.
pub fn build_scale_with(
    ex: &mut dyn Executor,
    lower: &WeightedGraph,
    p: &HopsetParams,
    schedule: &ThresholdSchedule,
    hops: u64,
    seed: u64,
    trace: Option<&mut Vec<PhaseTrace>>,
) -> Result<Vec<HopEdge>, HopsetError> {
    let n = lower.n();
    let scale = schedule.scale;
    let mut found: BTreeMap<(VertexId, VertexId), HopEdge> = BTreeMap::new();
    let mut cur = lower.clone();
    let mut active = alloc::vec![true; n];
    let mut traces = Vec::new();
    for ph in &schedule.phases {
        let mut new_edges = Vec::new();
        let mut unclustered: Vec<VertexId>;
        if ph.interconnect_only {
            unclustered = (0..n as VertexId).filter(|&v| active[v as usize]).collect();
            active.iter_mut().for_each(|a| *a = false);
        } else {
            let centers: Vec<VertexId> = (0..n as VertexId).filter(|&v| active[v as usize]).collect();
            let is_sampled: Vec<bool> = (0..n as VertexId)
                .map(|v| active[v as usize] && sampled(seed, scale, ph, p, v))
                .collect();
            let seeds: Vec<(VertexId, u64, u32)> =
                centers.iter().filter(|&&c| is_sampled[c as usize]).map(|&c| (c, 0, c)).collect();
            let labels = ex.single_label(&cur, &seeds, hops, &|_, d| d <= ph.delta);
            unclustered = Vec::new();
            for &c in &centers {
                if is_sampled[c as usize] {
                    continue;
                }
                match labels[c as usize] {
                    Some((d, r)) => new_edges.push(HopEdge { u: r, v: c, w: d, scale, phase: ph.index, kind: EdgeKind::Super }),
                    None => unclustered.push(c),
                }
            }
            active.copy_from_slice(&is_sampled);
        }
        let budget = overlap_budget(p, n, ph);
        let init: Vec<(VertexId, Entry)> =
            unclustered.iter().map(|&c| (c, Entry { key: c, dist: 0, tag: c })).collect();
        let tables = ex.keyed(&cur, &init, hops, &|_, d| 2 * d <= ph.delta, budget).map_err(|e| {
            HopsetError::OverlapBudgetExceeded { scale, phase: ph.index, vertex: e.vertex, count: e.admitted, budget }
        })?;
        let mut is_u = alloc::vec![false; n];
        for &c in &unclustered {
            is_u[c as usize] = true;
        }
        for &c in &unclustered {
            for e in &tables.tables[c as usize] {
                if e.key != c && is_u[e.key as usize] && e.key < c {
                    new_edges.push(HopEdge { u: e.key, v: c, w: e.dist, scale, phase: ph.index, kind: EdgeKind::Inter });
                }
            }
        }
        traces.push(PhaseTrace {
            scale,
            phase: ph.index,
            budget,
            counts: tables.tables.iter().map(|t| t.len() as u32).collect(),
        });
        if !new_edges.is_empty() {
            let add: Vec<(VertexId, VertexId, Weight)> = new_edges.iter().map(|e| (e.u, e.v, e.w)).collect();
            ex.added(&add);
            cur = cur.union(add);
        }
        for e in new_edges {
            insert_edge(&mut found, e);
        }
    }
    if let Some(t) = trace {
        t.extend(traces);
    }
    Ok(found.into_values().collect())
}

/// Sequential reference builder.
pub fn build_hopset(g: &WeightedGraph, p: &HopsetParams, seed: u64) -> Result<Hopset, HopsetError> {
    build_hopset_with(&mut Sequential, g, p, seed)
}

/// [`build_hopset`] on any executor.
pub fn build_hopset_with(ex: &mut dyn Executor, g: &WeightedGraph, p: &HopsetParams, seed: u64) -> Result<Hopset, HopsetError> {
    let n = g.n();
    let warnings = p.validate(n)?;
    let beta = hopbound(p, n)?;
    let mut out = Hopset {
        n,
        beta,
        params: *p,
        edges: Vec::new(),
        scales: Vec::new(),
        retries: 0,
        warnings,
        trace: Vec::new(),
    };
    if n <= 1 || g.m() == 0 {
        return Ok(out);
    }
    let mut all: BTreeMap<(VertexId, VertexId), HopEdge> = BTreeMap::new();
    let mut lower = g.clone();
    for scale in scale_range(n, g.max_weight(), beta) {
        let schedule = make_schedule(p, n, scale)?;
        let mut attempt = 0;
        let edges = loop {
            let mut tr = Vec::new();
            match build_scale_with(ex, &lower, p, &schedule, out.exploration_hops(), scale_seed(seed, scale, attempt), Some(&mut tr)) {
                Ok(e) => {
                    out.trace.extend(tr);
                    break e;
                }
                Err(e) if attempt + 1 >= MAX_RETRIES => return Err(e),
                Err(_) => {
                    attempt += 1;
                    out.retries += 1;
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
    Ok(out)
}

pub fn scale_seed(seed: u64, scale: u32, attempt: u32) -> u64 {
    coin::derive(coin::derive(seed, scale as u64 + 1), attempt as u64)
}

/// Hopset audit dump: `u v w scale phase kind` per line.
pub fn dump(h: &Hopset) -> alloc::string::String {
    use core::fmt::Write;
    let mut s = alloc::string::String::new();
    for e in &h.edges {
        let _ = writeln!(s, "{} {} {} {} {} {}", e.u, e.v, e.w, e.scale, e.phase, e.kind.as_str());
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSelection {
    All,
    /// `sources` random sources, every target.
    Sampled { sources: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopsetReport {
    pub checked: u64,
    /// (u, v, d_G, d^β) with d^β < d_G.
    pub lower_violations: Vec<(VertexId, VertexId, u64, u64)>,
    /// (u, v, d_G, d^β) with d^β > (1+ε)·d_G; `u64::MAX` for unreachable.
    pub upper_violations: Vec<(VertexId, VertexId, u64, u64)>,
}

impl HopsetReport {
    pub fn passed(&self) -> bool {
        self.lower_violations.is_empty() && self.upper_violations.is_empty()
    }
}

pub fn verify_hopset(
    g: &WeightedGraph,
    edges: &[(VertexId, VertexId, Weight)],
    beta: u64,
    eps: Ratio,
    pairs: PairSelection,
) -> HopsetReport {
    let n = g.n();
    let aug = g.union(edges.iter().copied());
    let factor = eps.one_plus().expect("small eps");
    let sources: Vec<VertexId> = match pairs {
        PairSelection::All => (0..n as VertexId).collect(),
        PairSelection::Sampled { sources, seed } => (0..sources as u64)
            .map(|i| (coin::word(seed, coin::stream::GENERATOR + 1, i) % n as u64) as VertexId)
            .collect(),
    };
    let mut rep = HopsetReport { checked: 0, lower_violations: Vec::new(), upper_violations: Vec::new() };
    for s in sources {
        let exact = oracle::dijkstra_raw(g, s);
        let hop = oracle::hop_restricted_raw(&aug, s, beta);
        for v in 0..n {
            let (d, db) = (exact[v], hop[v]);
            if d == INF {
                continue;
            }
            rep.checked += 1;
            if db < d {
                rep.lower_violations.push((s, v as VertexId, d, db));
            }
            if db == INF || !factor.bounds(db, d) {
                rep.upper_violations.push((s, v as VertexId, d, db));
            }
        }
    }
    rep
}

/// Per-phase visit counts with the phase budget, from a traced build.
pub fn overlap_histogram(h: &Hopset) -> Vec<(u32, u32, u32, usize)> {
    h.trace
        .iter()
        .map(|t| (t.scale, t.phase, t.counts.iter().copied().max().unwrap_or(0), t.budget))
        .collect()
}
