//! End-to-end sketch and SSSP pipelines: configuration, certificates and the
//! sequential reference every distributed executor must reproduce.

use crate::coin;
use crate::graph::{hop_restricted_sssp, DistanceVector, GraphError, VertexId, WeightedGraph};
use crate::hopset::{build_hopset, hopbound, Hopset, HopsetError, HopsetParams, MAX_RETRIES};
use crate::mpc::SimError;
use crate::ratio::{Ratio, RatioError};
use crate::spanner::{build_spanner, Spanner};
use crate::tz::{self, build_sketches_hop_limited, sample_hierarchy, LevelHierarchy, SketchSet, TzError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Hopset plus hop-limited explorations, one source chunk per round.
    Exact,
    /// As `Exact`, with a larger machine pool striping sources over replicas.
    Extra,
    /// Spanner first, then the extra-space path on the spanner.
    Polylog,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Extra => "extra",
            Mode::Polylog => "polylog",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("m={m} below the density precondition {needed}")]
    DensityTooLow { m: usize, needed: u64 },
    #[error("sketch of {words} words exceeds the payload limit {limit}")]
    SketchTooLargeForPayload { words: u64, limit: u64 },
    #[error("no admissible hierarchy after {0} attempts")]
    RetriesExhausted(u32),
    #[error(transparent)]
    Tz(#[from] TzError),
    #[error(transparent)]
    Hopset(#[from] HopsetError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ratio(#[from] RatioError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub k: u32,
    /// ε_total; the hopset gets a third of it.
    pub eps: Ratio,
    pub gamma: Ratio,
    pub mode: Mode,
    pub seed: u64,
    pub hopset: HopsetParams,
    pub c_slack: u64,
    /// Words of S per unit of k·n^{1/k}·ln n.
    pub c_mem: f64,
    /// Admission cap constant, see [`tz::default_cap`].
    pub c_cap: f64,
    /// Polylog precondition m ≥ c·k·n^{1+1/k}·ln n.
    pub c_density: f64,
    /// Replica groups for `Extra`.
    pub extra_factor: u64,
    /// Count inbound plus outbound words against S.
    pub strict_io: bool,
}

impl PipelineConfig {
    /// κ = max(k, 2), ρ = 1/κ, ε_hopset = ε/3.
    pub fn new(k: u32, eps: Ratio, mode: Mode, seed: u64) -> Result<PipelineConfig, PipelineError> {
        let kappa = k.max(2);
        let rho = Ratio::new(1, kappa as u64)?;
        let hopset = HopsetParams::new(kappa, rho, eps.div_int(3)?);
        Ok(PipelineConfig {
            k,
            eps,
            gamma: Ratio::new(1, 2)?,
            mode,
            seed,
            hopset,
            c_slack: 8,
            c_mem: 8.0,
            c_cap: 4.0,
            c_density: 1.0 / 16.0,
            extra_factor: 4,
            strict_io: false,
        })
    }

    /// Spanner stretch parameter t (stretch 2t−1) of the polylog path.
    pub fn spanner_t(&self) -> u32 {
        2 * self.k
    }

    pub fn tz_stretch(&self) -> Ratio {
        tz::tz_stretch(self.k)
    }

    /// Certified stretch of the mode's sketches, exact.
    pub fn certificate(&self) -> Result<Ratio, PipelineError> {
        let base = self.tz_stretch().mul(self.eps.one_plus()?)?;
        Ok(match self.mode {
            Mode::Polylog => base.mul(Ratio::integer(2 * self.spanner_t() as u64 - 1))?,
            _ => base,
        })
    }

    pub fn cap(&self, n: usize) -> usize {
        tz::default_cap(n, self.k, self.c_cap)
    }

    /// Smallest S holding one sketch and one level's tables.
    pub fn s_floor(&self, n: usize) -> u64 {
        let n_f = n.max(2) as f64;
        libm::ceil(self.c_mem * self.k as f64 * libm::pow(n_f, 1.0 / self.k as f64) * libm::log(n_f)) as u64
    }

    pub fn density_needed(&self, n: usize) -> u64 {
        let n_f = n.max(2) as f64;
        let k = self.k as f64;
        libm::ceil(self.c_density * k * libm::pow(n_f, 1.0 + 1.0 / k) * libm::log(n_f)) as u64
    }

    pub fn check_density(&self, g: &WeightedGraph) -> Result<(), PipelineError> {
        let needed = self.density_needed(g.n());
        if (g.m() as u64) < needed {
            return Err(PipelineError::DensityTooLow { m: g.m(), needed });
        }
        Ok(())
    }
}

/// Hop limit of sketch and SSSP explorations on G ∪ H.
pub fn hop_limit(beta: u64, n: usize) -> u64 {
    beta.min(n.saturating_sub(1) as u64)
}

/// Hierarchy used by attempt `attempt`.
pub fn hierarchy(n: usize, k: u32, seed: u64, attempt: u32) -> Result<LevelHierarchy, TzError> {
    sample_hierarchy(n, k, coin::derive(seed, attempt as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    /// The graph the hopset was built on: G, or the spanner in polylog mode.
    pub base: WeightedGraph,
    pub spanner: Option<Spanner>,
    pub hopset: Hopset,
    pub hop: u64,
    pub sketches: SketchSet,
    /// Hierarchies rejected by the admission cap.
    pub retries: u32,
}

fn base_graph(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<(WeightedGraph, Option<Spanner>), PipelineError> {
    if cfg.mode == Mode::Polylog {
        cfg.check_density(g)?;
        let sp = build_spanner(g, cfg.spanner_t(), cfg.seed);
        Ok((sp.graph(g.n()), Some(sp)))
    } else {
        Ok((g.clone(), None))
    }
}

/// Sequential sketch pipeline. Hopset, spanner and hierarchy share `cfg.seed`
/// through disjoint coin streams.
pub fn build_reference(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<Reference, PipelineError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let (base, spanner) = base_graph(g, cfg)?;
    let hopset = build_hopset(&base, &cfg.hopset, cfg.seed)?;
    let aug = hopset.augment(&base);
    let n = g.n();
    let hop = hop_limit(hopset.beta, n);
    let cert = cfg.certificate()?;
    for attempt in 0..MAX_RETRIES {
        let h = hierarchy(n, cfg.k, cfg.seed, attempt)?;
        match build_sketches_hop_limited(&aug, &h, hop, cfg.cap(n), cert) {
            Ok(sketches) => return Ok(Reference { base, spanner, hopset, hop, sketches, retries: attempt }),
            Err(TzError::Cap(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(PipelineError::RetriesExhausted(MAX_RETRIES))
}

/// SSSP certificate: 1+ε, or (4k−1)(1+ε) through the spanner.
pub fn sssp_certificate(cfg: &PipelineConfig) -> Result<Ratio, PipelineError> {
    let one = cfg.eps.one_plus()?;
    Ok(match cfg.mode {
        Mode::Polylog => one.mul(Ratio::integer(2 * cfg.spanner_t() as u64 - 1))?,
        _ => one,
    })
}

/// Sequential SSSP: one β-restricted exploration from `s` on base ∪ H.
pub fn sssp_reference(g: &WeightedGraph, cfg: &PipelineConfig, s: VertexId) -> Result<DistanceVector, PipelineError> {
    let (base, _) = base_graph(g, cfg)?;
    let hopset = build_hopset(&base, &cfg.hopset, cfg.seed)?;
    let aug = hopset.augment(&base);
    Ok(hop_restricted_sssp(&aug, s, hop_limit(hopbound(&cfg.hopset, g.n())?, g.n())))
}
