//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use tzmpc_core::clique::{clique_build_oracle, clique_build_oracle_sparsified, coordinator_query, Clique, CliqueError};
use tzmpc_core::graph::generate_graph;
use tzmpc_core::hopset::{dump, Hopset};
use tzmpc_core::mpc::pipeline::{mpc_build_sketches, query_two_rounds};
use tzmpc_core::pipeline::{build_reference, Mode, PipelineConfig};
use tzmpc_core::spanner::Spanner;
use tzmpc_core::tz::{sketch_size_report, SketchSet};
use tzmpc_core::verify::{check_sketches, Pairs};
use tzmpc_core::{Ratio, VertexId, WeightedGraph};

use crate::args::{Command, GenSpec, InputArgs, ModeArg, ParamArgs, Sizes};
use crate::formats::{decode_sketches, encode_sketches, parse_edge_list, write_edge_list};
use crate::manifest::{pipeline_config, sha256_hex, Certificates, GraphSource, OutputFile, RunConfig, RunManifest};
use crate::report::MetricsReport;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";
/// Pairs checked by `verify` above the exhaustive range.
pub const DEFAULT_PAIRS: u64 = 10_000;
pub const EXHAUSTIVE_UP_TO: usize = 200;

pub fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Generate { gen, seed, out: path } => generate(&gen, seed, path.as_deref(), out),
        Command::Build { manifest: Some(m), out: dir, .. } => rerun(&m, dir.as_deref(), out),
        Command::Build { input, params, out: dir, manifest: None } => {
            let dir = dir.ok_or_else(|| CliError::Usage("build needs --out DIR".into()))?;
            build(&input, &params, &dir, out)
        }
        Command::Query { u, v, sketches: Some(path), .. } => {
            let s = decode_sketches(&fs::read(path)?)?;
            check_vertices(s.n(), u, v)?;
            emit_query(out, u, v, s.query(u, v)?, 0)
        }
        Command::Query { u, v, sketches: None, input, params } => query(&input, &params, u, v, out),
        Command::Verify { sketches, input, params, manifest, cert, pairs } => {
            verify(&sketches, &input, &params, manifest.as_deref(), cert, pairs, out)
        }
        Command::Bench { modes, sizes, density, wmax, params, out: path } => {
            bench(&modes, &sizes, density, wmax, &params, path.as_deref(), out)
        }
    }
}

fn generate(gen: &GenSpec, seed: u64, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let g = generate_graph(gen.kind, gen.n, gen.density, gen.wmax, seed)?;
    let text = write_edge_list(&g);
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_graph(input: &InputArgs, seed: u64) -> Result<(WeightedGraph, GraphSource), CliError> {
    match (&input.graph, &input.gen) {
        (Some(p), _) => {
            let g = read_graph(p)?;
            let abs = fs::canonicalize(p)?;
            Ok((g, GraphSource::File { path: abs.display().to_string() }))
        }
        (None, Some(gen)) => {
            let g = generate_graph(gen.kind, gen.n, gen.density, gen.wmax, seed)?;
            Ok((g, GraphSource::generated(gen, seed)))
        }
        (None, None) => Err(CliError::Usage("one of --graph or --gen is required".into())),
    }
}

/// Relative file sources resolve against `base`.
pub fn load_source(src: &GraphSource, base: &Path) -> Result<WeightedGraph, CliError> {
    match src {
        GraphSource::File { path } => read_graph(&base.join(path)),
        GraphSource::Generated { kind, n, density, wmax, seed } => {
            let kind = kind.parse().map_err(|e| CliError::Input(format!("{e}")))?;
            Ok(generate_graph(kind, *n, *density, *wmax, *seed)?)
        }
    }
}

/// What a build produced, independent of the executor.
pub struct Built {
    pub sketches: SketchSet,
    pub hopset: Hopset,
    pub hop: u64,
    pub spanner: Option<Spanner>,
    pub base_m: usize,
    pub retries: u32,
    pub metrics: Option<MetricsReport>,
}

pub fn execute(g: &WeightedGraph, rc: &RunConfig) -> Result<Built, CliError> {
    let cfg = rc.pipeline()?;
    let mode = rc.mode_arg()?;
    if rc.spanner_t.is_some() && mode != ModeArg::Clique {
        return Err(CliError::Usage("--spanner-t applies to clique mode only".into()));
    }
    Ok(match mode {
        ModeArg::Centralized => {
            let r = build_reference(g, &cfg)?;
            Built {
                base_m: r.base.m(),
                sketches: r.sketches,
                hopset: r.hopset,
                hop: r.hop,
                spanner: r.spanner,
                retries: r.retries,
                metrics: None,
            }
        }
        ModeArg::Clique => {
            let mut cc = Clique::new(g, rc.clique())?;
            let b = match rc.spanner_t {
                Some(t) => clique_build_oracle_sparsified(&mut cc, &cfg, t)?,
                None => clique_build_oracle(&mut cc, &cfg)?,
            };
            let sketches = cc.oracle().cloned().ok_or(CliqueError::NotBuilt)?;
            Built {
                base_m: b.spanner.as_ref().map_or(g.m(), |s| s.edges.len()),
                sketches,
                hopset: b.hopset,
                hop: b.hop,
                spanner: b.spanner,
                retries: b.retries,
                metrics: Some(MetricsReport::clique(&cc.metrics, cc.cfg.c_w)),
            }
        }
        ModeArg::Exact | ModeArg::Extra | ModeArg::Polylog => {
            let b = mpc_build_sketches(g, &cfg)?;
            let metrics = MetricsReport::from(b.metrics());
            if metrics.violations > 0 {
                return Err(CliError::Model(format!("{} budget violations recorded", metrics.violations)));
            }
            Built {
                base_m: b.base_m,
                sketches: b.sketches,
                hopset: b.hopset,
                hop: b.hop,
                spanner: b.spanner,
                retries: b.retries,
                metrics: Some(metrics),
            }
        }
    })
}

fn certificates(g: &WeightedGraph, b: &Built) -> Certificates {
    let size = sketch_size_report(&b.sketches, 4.0);
    Certificates {
        stretch: b.sketches.certificate.to_string(),
        n: g.n(),
        m: g.m(),
        base_m: b.base_m,
        beta: b.hopset.beta,
        hop_limit: b.hop,
        hopset_edges: b.hopset.len(),
        spanner_edges: b.spanner.as_ref().map(|s| s.edges.len()),
        max_bunch: size.max_bunch,
        mean_bunch: size.mean_bunch,
        sketch_words: size.total_words,
        rounds: b.metrics.as_ref().map_or(0, |m| m.rounds),
        retries: b.retries,
        hopset_retries: b.hopset.retries,
    }
}

/// Run `rc` on `g`; returns the manifest and the output files by name.
pub fn produce(g: &WeightedGraph, rc: RunConfig) -> Result<(RunManifest, BTreeMap<String, Vec<u8>>), CliError> {
    let b = execute(g, &rc)?;
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    files.insert("sketches.tzsk".into(), encode_sketches(&b.sketches));
    files.insert("hopset.txt".into(), dump(&b.hopset).into_bytes());
    if let Some(sp) = &b.spanner {
        files.insert("spanner.txt".into(), write_edge_list(&sp.graph(g.n())).into_bytes());
    }
    if let Some(m) = &b.metrics {
        files.insert("metrics.json".into(), m.to_json().into_bytes());
        files.insert("metrics.csv".into(), m.to_csv().into_bytes());
    }
    let outputs = files
        .iter()
        .map(|(name, bytes)| (name.clone(), OutputFile { path: name.clone(), sha256: sha256_hex(bytes) }))
        .collect();
    let manifest = RunManifest {
        command: "build".into(),
        input_digest: sha256_hex(write_edge_list(g).as_bytes()),
        outputs,
        certificates: certificates(g, &b),
        metrics: b.metrics,
        config: rc,
    };
    Ok((manifest, files))
}

fn write_outputs(dir: &Path, m: &RunManifest, files: &BTreeMap<String, Vec<u8>>) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    fs::write(dir.join(MANIFEST), m.to_json())?;
    Ok(())
}

fn summary(m: &RunManifest) -> String {
    let c = &m.certificates;
    format!(
        "mode={} n={} m={} stretch={} rounds={} hopset_edges={} beta={} retries={}",
        m.config.mode, c.n, c.m, c.stretch, c.rounds, c.hopset_edges, c.beta, c.retries
    )
}

fn build(input: &InputArgs, params: &ParamArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (g, src) = load_graph(input, params.seed)?;
    let rc = RunConfig::from_params(src, params)?;
    let (m, files) = produce(&g, rc)?;
    write_outputs(dir, &m, &files)?;
    writeln!(out, "{}", summary(&m))?;
    writeln!(out, "wrote {}", dir.join(MANIFEST).display())?;
    Ok(())
}

fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    RunManifest::from_json(&text)
}

fn manifest_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

/// Re-run a manifest and compare every output hash.
fn rerun(path: &Path, dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let old = read_manifest(path)?;
    let g = load_source(&old.config.graph, manifest_dir(path))?;
    if sha256_hex(write_edge_list(&g).as_bytes()) != old.input_digest {
        return Err(CliError::Input("input graph does not match the manifest digest".into()));
    }
    let (new, files) = produce(&g, old.config.clone())?;
    let mut bad = Vec::new();
    for (name, f) in &old.outputs {
        let got = new.outputs.get(name).map(|o| o.sha256.as_str());
        let ok = got == Some(f.sha256.as_str());
        writeln!(out, "{} {} {}", if ok { "ok" } else { "DIFF" }, name, got.unwrap_or("missing"))?;
        if !ok {
            bad.push(name.clone());
        }
    }
    bad.extend(new.outputs.keys().filter(|k| !old.outputs.contains_key(*k)).cloned());
    if let Some(d) = dir {
        write_outputs(d, &new, &files)?;
    }
    if !bad.is_empty() {
        return Err(CliError::Verify(format!("outputs differ from the manifest: {}", bad.join(", "))));
    }
    writeln!(out, "reproduced {} outputs", old.outputs.len())?;
    Ok(())
}

fn check_vertices(n: usize, u: VertexId, v: VertexId) -> Result<(), CliError> {
    match [u, v].into_iter().find(|&x| x as usize >= n) {
        Some(x) => Err(CliError::Input(format!("vertex {x} out of range for n={n}"))),
        None => Ok(()),
    }
}

fn emit_query(out: &mut dyn Write, u: VertexId, v: VertexId, estimate: u64, rounds: u64) -> Result<(), CliError> {
    let line = serde_json::json!({ "u": u, "v": v, "estimate": estimate, "rounds": rounds });
    writeln!(out, "{line}")?;
    Ok(())
}

/// Build in the chosen mode, then query where the sketches live: two MPC
/// rounds, or locally at the clique coordinator.
fn query(input: &InputArgs, params: &ParamArgs, u: VertexId, v: VertexId, out: &mut dyn Write) -> Result<(), CliError> {
    let (g, src) = load_graph(input, params.seed)?;
    check_vertices(g.n(), u, v)?;
    let rc = RunConfig::from_params(src, params)?;
    match params.mode {
        ModeArg::Exact | ModeArg::Extra | ModeArg::Polylog => {
            let mut b = mpc_build_sketches(&g, &rc.pipeline()?)?;
            let (w, rounds) = query_two_rounds(&mut b, 0, u, v)?;
            emit_query(out, u, v, w, rounds)
        }
        ModeArg::Clique => {
            let cfg = rc.pipeline()?;
            let mut cc = Clique::new(&g, rc.clique())?;
            match rc.spanner_t {
                Some(t) => clique_build_oracle_sparsified(&mut cc, &cfg, t)?,
                None => clique_build_oracle(&mut cc, &cfg)?,
            };
            emit_query(out, u, v, coordinator_query(&cc, u, v)?, 0)
        }
        ModeArg::Centralized => {
            let b = execute(&g, &rc)?;
            emit_query(out, u, v, b.sketches.query(u, v)?, 0)
        }
    }
}

/// Certificate implied by the parameters alone.
pub fn certificate_for(params: &ParamArgs) -> Result<Ratio, CliError> {
    let cfg = pipeline_config(params)?;
    let mut c = cfg.certificate()?;
    if let (ModeArg::Clique, Some(t)) = (params.mode, params.spanner_t) {
        c = c.mul(Ratio::integer(2 * t as u64 - 1))?;
    }
    Ok(c)
}

fn verify(
    sketches: &Path,
    input: &InputArgs,
    params: &ParamArgs,
    manifest: Option<&Path>,
    cert: Option<Ratio>,
    pairs: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let s = decode_sketches(&fs::read(sketches)?)?;
    let m = manifest.map(read_manifest).transpose()?;
    let g = match (&m, input.graph.is_none() && input.gen.is_none()) {
        (Some(mf), true) => load_source(&mf.config.graph, manifest_dir(manifest.expect("manifest read")))?,
        _ => load_graph(input, params.seed)?.0,
    };
    if s.n() != g.n() {
        return Err(CliError::Input(format!("sketches cover n={}, graph has n={}", s.n(), g.n())));
    }
    let cert = match (cert, &m) {
        (Some(c), _) => c,
        (None, Some(mf)) => mf.stretch()?,
        (None, None) => certificate_for(params)?,
    };
    let sel = match pairs {
        Some(count) => Pairs::Sampled { count, seed: params.seed },
        None if g.n() <= EXHAUSTIVE_UP_TO => Pairs::All,
        None => Pairs::Sampled { count: DEFAULT_PAIRS, seed: params.seed },
    };
    let rep = check_sketches(&g, &s, cert, sel);
    writeln!(out, "checked {} pairs against certificate {}; max ratio {:.4}", rep.checked, cert, rep.max_ratio)?;
    if let Some(x) = rep.violations.first() {
        let est = x.estimate.map_or("none".to_string(), |e| e.to_string());
        return Err(CliError::Verify(format!(
            "pair ({}, {}): estimate {} against distance {} ({:?}); {} violations",
            x.u,
            x.v,
            est,
            x.dist,
            x.fault,
            rep.violations.len()
        )));
    }
    writeln!(out, "PASS")?;
    Ok(())
}

/// Erdős–Rényi probability putting m about 20% above the polylog density
/// floor, so every mode accepts the same graph.
pub fn bench_density(cfg: &PipelineConfig, n: usize) -> f64 {
    let need = cfg.density_needed(n) as f64;
    (1.2 * need * 2.0 / (n as f64 * (n as f64 - 1.0)).max(1.0)).min(1.0)
}

fn bench(
    modes: &[ModeArg],
    sizes: &Sizes,
    density: Option<f64>,
    wmax: u64,
    params: &ParamArgs,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut csv = String::from("n,m,mode,rounds,messages,max_mem\n");
    if path.is_none() {
        out.write_all(csv.as_bytes())?;
    }
    let polylog = PipelineConfig::new(params.k, params.eps, Mode::Polylog, params.seed)?;
    for &n in &sizes.0 {
        let p = density.unwrap_or_else(|| bench_density(&polylog, n));
        let g = generate_graph(tzmpc_core::graph::GraphKind::ErdosRenyi, n, p, wmax, params.seed)?;
        for &mode in modes {
            let mp = ParamArgs { mode, ..params.clone() };
            let src = GraphSource::Generated { kind: "erdos_renyi".into(), n, density: p, wmax, seed: params.seed };
            let b = execute(&g, &RunConfig::from_params(src, &mp)?)?;
            let (rounds, messages, max_mem) = b.metrics.as_ref().map_or((0, 0, 0), |m| (m.rounds, m.messages, m.max_mem));
            let row = format!("{n},{},{},{rounds},{messages},{max_mem}\n", g.m(), mode.as_str());
            if path.is_none() {
                out.write_all(row.as_bytes())?;
                out.flush()?;
            }
            csv.push_str(&row);
        }
    }
    if let Some(p) = path {
        fs::write(p, csv)?;
    }
    Ok(())
}
