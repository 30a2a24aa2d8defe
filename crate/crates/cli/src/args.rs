//! Command-line surface.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tzmpc_core::graph::GraphKind;
use tzmpc_core::pipeline::Mode;
use tzmpc_core::Ratio;

#[derive(Parser, Debug)]
#[command(name = "tzmpc", version, about = "Distance sketches, hopsets and spanners in simulated MPC and Congested Clique")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated graph as an edge list.
    Generate {
        #[arg(long, value_name = "KIND,N,DENSITY,WMAX")]
        gen: GenSpec,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build sketches and write them with a run manifest.
    Build {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-run a manifest and compare output hashes.
        #[arg(long, conflicts_with_all = ["graph", "gen"])]
        manifest: Option<PathBuf>,
    },
    /// Estimate d(u, v).
    Query {
        u: u32,
        v: u32,
        /// Answer locally from a sketch file.
        #[arg(long, conflicts_with_all = ["graph", "gen"])]
        sketches: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check a sketch file against exact distances.
    Verify {
        #[arg(long)]
        sketches: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Take the graph and certificate from a build manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Certificate to check instead of the one implied by the parameters.
        #[arg(long)]
        cert: Option<Ratio>,
        /// Sampled pairs; exhaustive up to n = 200 otherwise.
        #[arg(long)]
        pairs: Option<u64>,
    },
    /// Rounds, messages and memory across a size sweep, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "exact,polylog")]
        modes: Vec<ModeArg>,
        #[arg(long, default_value = "128..2048")]
        sizes: Sizes,
        /// Edge probability; defaults to just above the polylog density floor.
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, default_value_t = 20)]
        wmax: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    #[arg(long, conflicts_with = "gen")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_name = "KIND,N,DENSITY,WMAX")]
    pub gen: Option<GenSpec>,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Hopset κ; max(k, 2) when absent.
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Hopset ρ; 1/κ when absent.
    #[arg(long)]
    pub rho: Option<Ratio>,
    #[arg(long, default_value = "1/2")]
    pub eps: Ratio,
    #[arg(long, default_value = "1/2")]
    pub gamma: Ratio,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Clique mode: build on a (2t−1)-spanner first.
    #[arg(long)]
    pub spanner_t: Option<u32>,
    #[arg(long)]
    pub strict_io: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Extra,
    Polylog,
    Clique,
    Centralized,
}

impl ModeArg {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeArg::Exact => "exact",
            ModeArg::Extra => "extra",
            ModeArg::Polylog => "polylog",
            ModeArg::Clique => "clique",
            ModeArg::Centralized => "centralized",
        }
    }

    /// Pipeline mode used for parameters and certificates.
    pub fn pipeline(self) -> Mode {
        match self {
            ModeArg::Extra => Mode::Extra,
            ModeArg::Polylog => Mode::Polylog,
            _ => Mode::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GraphKind,
    pub n: usize,
    pub density: f64,
    pub wmax: u64,
}

impl FromStr for GenSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<GenSpec, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [kind, n, density, wmax] = parts[..] else {
            return Err("expected KIND,N,DENSITY,WMAX".into());
        };
        Ok(GenSpec {
            kind: kind.parse().map_err(|e| format!("{e}"))?,
            n: n.parse().map_err(|_| format!("bad N {n:?}"))?,
            density: density.parse().map_err(|_| format!("bad DENSITY {density:?}"))?,
            wmax: wmax.parse().map_err(|_| format!("bad WMAX {wmax:?}"))?,
        })
    }
}

/// `a..b` doubles from a up to b; otherwise a comma list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = String;
    fn from_str(s: &str) -> Result<Sizes, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad size {t:?}"));
        if let Some((a, b)) = s.split_once("..") {
            let (mut a, b) = (num(a)?, num(b)?);
            if a == 0 || a > b {
                return Err("range must satisfy 0 < a ≤ b".into());
            }
            let mut v = Vec::new();
            while a <= b {
                v.push(a);
                a *= 2;
            }
            return Ok(Sizes(v));
        }
        s.split(',').map(num).collect::<Result<_, _>>().map(Sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!("128..2048".parse::<Sizes>().unwrap().0, vec![128, 256, 512, 1024, 2048]);
        assert_eq!("5,7".parse::<Sizes>().unwrap().0, vec![5, 7]);
        assert!("0..4".parse::<Sizes>().is_err());
        let g: GenSpec = "er,100,0.1,20".parse().unwrap();
        assert_eq!((g.kind, g.n, g.wmax), (GraphKind::ErdosRenyi, 100, 20));
        assert!("er,100".parse::<GenSpec>().is_err());
    }

    #[test]
    fn clap_definition() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["tzmpc", "build", "--gen", "path,8,0,5", "--eps", "1/4", "--mode", "polylog"]).unwrap();
        let Command::Build { params, .. } = c.command else { panic!() };
        assert_eq!(params.eps, Ratio::new(1, 4).unwrap());
        assert_eq!(params.mode, ModeArg::Polylog);
    }
}
