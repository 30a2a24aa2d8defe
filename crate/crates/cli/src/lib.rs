//! File formats, manifests and the `tzmpc` command line.

pub mod args;
pub mod commands;
pub mod formats;
pub mod manifest;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use tzmpc_core::clique::CliqueError;
use tzmpc_core::graph::GraphError;
use tzmpc_core::hopset::HopsetError;
use tzmpc_core::mpc::SimError;
use tzmpc_core::pipeline::PipelineError;
use tzmpc_core::ratio::RatioError;
use tzmpc_core::tz::TzError;

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input, or parameters the pipeline rejects.
    #[error("{0}")]
    Input(String),
    /// The simulated model's budget was exceeded.
    #[error("model violation: {0}")]
    Model(String),
    #[error("verification failed: {0}")]
    Verify(String),
    /// A run that produced no certified result, e.g. exhausted retries.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => EXIT_USAGE,
            CliError::Model(_) => EXIT_MODEL,
            CliError::Verify(_) | CliError::Failed(_) => EXIT_VERIFY,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<RatioError> for CliError {
    fn from(e: RatioError) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> CliError {
        match e {
            e if e.is_model_violation() => CliError::Model(e.to_string()),
            SimError::Config(_) | SimError::CapacityExceeded { .. } | SimError::InsufficientExtraSpace { .. } => {
                CliError::Input(e.to_string())
            }
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<HopsetError> for CliError {
    fn from(e: HopsetError) -> CliError {
        match e {
            HopsetError::InvalidParams(_) => CliError::Input(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<TzError> for CliError {
    fn from(e: TzError) -> CliError {
        match e {
            TzError::InvalidK { .. } | TzError::Graph(_) => CliError::Input(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::Sim(e) => e.into(),
            PipelineError::Hopset(e) => e.into(),
            PipelineError::Graph(e) => e.into(),
            PipelineError::Ratio(e) => e.into(),
            PipelineError::Tz(e) => e.into(),
            PipelineError::DensityTooLow { .. } => CliError::Input(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<CliqueError> for CliError {
    fn from(e: CliqueError) -> CliError {
        match e {
            CliqueError::BudgetViolation { .. } | CliqueError::PayloadTooLarge { .. } => CliError::Model(e.to_string()),
            CliqueError::Pipeline(e) => e.into(),
            CliqueError::Hopset(e) => e.into(),
            CliqueError::Graph(e) => e.into(),
            CliqueError::Tz(e) => e.into(),
            e => CliError::Failed(e.to_string()),
        }
    }
}

/// Parse `argv`, run the command and return the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "tzmpc: {e}");
            e.exit_code()
        }
    }
}
