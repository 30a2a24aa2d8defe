//! Run manifests: everything needed to reproduce a build, plus what it made.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tzmpc_core::clique::CliqueConfig;
use tzmpc_core::hopset::MAX_RETRIES;
use tzmpc_core::pipeline::PipelineConfig;
use tzmpc_core::Ratio;

use crate::args::{GenSpec, ModeArg, ParamArgs};
use crate::report::MetricsReport;
use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GraphSource {
    /// Path relative to the manifest's directory, or absolute.
    File { path: String },
    Generated { kind: String, n: usize, density: f64, wmax: u64, seed: u64 },
}

impl GraphSource {
    pub fn generated(g: &GenSpec, seed: u64) -> GraphSource {
        GraphSource::Generated { kind: g.kind.as_str().into(), n: g.n, density: g.density, wmax: g.wmax, seed }
    }
}

/// Tunable constants of the pipelines, recorded so a rerun uses the same.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_slack: u64,
    pub c_mem: f64,
    pub c_cap: f64,
    pub c_density: f64,
    pub extra_factor: u64,
    pub c_beta: String,
    pub c_ov: f64,
    pub stage2: u64,
    pub c_w: u64,
    pub max_retries: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub mode: String,
    pub seed: u64,
    pub k: u32,
    pub kappa: u32,
    pub rho: String,
    pub eps: String,
    pub gamma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spanner_t: Option<u32>,
    pub strict_io: bool,
    pub constants: Constants,
}

fn ratio(field: &str, s: &str) -> Result<Ratio, CliError> {
    s.parse().map_err(|e| CliError::Input(format!("{field}: {e}")))
}

impl RunConfig {
    pub fn from_params(graph: GraphSource, p: &ParamArgs) -> Result<RunConfig, CliError> {
        let cfg = pipeline_config(p)?;
        let cc = CliqueConfig::new(p.seed);
        Ok(RunConfig {
            graph,
            mode: p.mode.as_str().into(),
            seed: p.seed,
            k: p.k,
            kappa: cfg.hopset.kappa,
            rho: cfg.hopset.rho.to_string(),
            eps: cfg.eps.to_string(),
            gamma: cfg.gamma.to_string(),
            spanner_t: p.spanner_t,
            strict_io: p.strict_io,
            constants: Constants {
                c_slack: cfg.c_slack,
                c_mem: cfg.c_mem,
                c_cap: cfg.c_cap,
                c_density: cfg.c_density,
                extra_factor: cfg.extra_factor,
                c_beta: cfg.hopset.c_beta.to_string(),
                c_ov: cfg.hopset.c_ov,
                stage2: cfg.hopset.stage2,
                c_w: cc.c_w,
                max_retries: MAX_RETRIES,
            },
        })
    }

    pub fn mode_arg(&self) -> Result<ModeArg, CliError> {
        <ModeArg as clap::ValueEnum>::from_str(&self.mode, false)
            .map_err(|_| CliError::Input(format!("unknown mode {:?}", self.mode)))
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, CliError> {
        let c = &self.constants;
        if c.max_retries != MAX_RETRIES {
            return Err(CliError::Input(format!("manifest expects {} retries, this build uses {MAX_RETRIES}", c.max_retries)));
        }
        let mut cfg = PipelineConfig::new(self.k, ratio("eps", &self.eps)?, self.mode_arg()?.pipeline(), self.seed)?;
        cfg.gamma = ratio("gamma", &self.gamma)?;
        cfg.hopset.kappa = self.kappa;
        cfg.hopset.rho = ratio("rho", &self.rho)?;
        cfg.hopset.c_beta = ratio("c_beta", &c.c_beta)?;
        cfg.hopset.c_ov = c.c_ov;
        cfg.hopset.stage2 = c.stage2;
        cfg.c_slack = c.c_slack;
        cfg.c_mem = c.c_mem;
        cfg.c_cap = c.c_cap;
        cfg.c_density = c.c_density;
        cfg.extra_factor = c.extra_factor;
        cfg.strict_io = self.strict_io;
        Ok(cfg)
    }

    pub fn clique(&self) -> CliqueConfig {
        CliqueConfig { c_w: self.constants.c_w, ..CliqueConfig::new(self.seed) }
    }
}

/// Pipeline configuration from flags; κ and ρ override the derived values.
pub fn pipeline_config(p: &ParamArgs) -> Result<PipelineConfig, CliError> {
    if p.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let mut cfg = PipelineConfig::new(p.k, p.eps, p.mode.pipeline(), p.seed)?;
    cfg.gamma = p.gamma;
    if let Some(kappa) = p.kappa {
        cfg.hopset.kappa = kappa;
        cfg.hopset.rho = Ratio::new(1, kappa.max(1) as u64)?;
    }
    if let Some(rho) = p.rho {
        cfg.hopset.rho = rho;
    }
    cfg.strict_io = p.strict_io;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    /// Certified stretch of every sketch query, exact.
    pub stretch: String,
    pub n: usize,
    pub m: usize,
    /// Edges of the graph the hopset was built on.
    pub base_m: usize,
    pub beta: u64,
    pub hop_limit: u64,
    pub hopset_edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spanner_edges: Option<usize>,
    pub max_bunch: usize,
    pub mean_bunch: f64,
    pub sketch_words: usize,
    pub rounds: u64,
    /// Hierarchies rejected by the admission cap.
    pub retries: u32,
    pub hopset_retries: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    /// SHA-256 of the canonical edge list of the input.
    pub input_digest: String,
    pub outputs: BTreeMap<String, OutputFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    pub certificates: Certificates,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<RunManifest, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Input(format!("manifest: {e}")))
    }

    pub fn stretch(&self) -> Result<Ratio, CliError> {
        ratio("stretch", &self.certificates.stretch)
    }
}
