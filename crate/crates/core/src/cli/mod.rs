//! Command-line harness: `generate`, `fit`, `transfer` and `eval`.
//!
//! Each command reads a TOML or JSON config (`--config`), applies dotted
//! `--set key=value` overrides and the command's own flags, rejects unknown
//! keys, and writes its outputs under `--out`.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

pub use commands::*;
pub use config::*;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "specshape", version, about = "Adaptive spectral shaping for graph signals")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML or JSON config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (required).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for transfer sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Override a config entry, e.g. `--set training.epochs=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph, a ground-truth response and a signal dataset.
    Generate,
    /// Fit a filter bank to a dataset.
    Fit {
        #[arg(long, value_name = "DIR")]
        dataset: Option<PathBuf>,
        /// Number of shaping components.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run a transfer sweep.
    Transfer {
        /// Fail if any adaptation touched the baseline network.
        #[arg(long)]
        verify_freeze: bool,
    },
    /// Score a checkpoint on a dataset.
    Eval {
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<EvalMode>,
        /// Chebyshev degree.
        #[arg(long)]
        degree: Option<usize>,
    },
}

fn path_value(p: &std::path::Path) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

/// Resolve the command's config and run it.
pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let out = g
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("missing required flag --out".into()))?;
    if g.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let mut overrides = g
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>>>()?;
    let mut set = |k: &str, v: Value| overrides.push((k.to_string(), v));
    match &cli.command {
        Command::Generate => {
            if let Some(s) = g.seed {
                set("seed", s.into());
            }
            let cfg: GenerateConfig = resolve(g.config.as_deref(), &overrides)?;
            cmd_generate(&cfg, out)
        }
        Command::Fit { dataset, k } => {
            if let Some(s) = g.seed {
                set("training.seed", s.into());
            }
            if let Some(d) = dataset {
                set("dataset", path_value(d));
            }
            if let Some(k) = k {
                set("k", (*k).into());
            }
            let cfg: FitConfig = resolve(g.config.as_deref(), &overrides)?;
            cmd_fit(&cfg, out).map(|_| ())
        }
        Command::Transfer { verify_freeze } => {
            if let Some(s) = g.seed {
                set("seed", s.into());
            }
            if *verify_freeze {
                set("verify_freeze", true.into());
            }
            let cfg: TransferConfig = resolve(g.config.as_deref(), &overrides)?;
            cmd_transfer(&cfg, out, g.jobs).map(|_| ())
        }
        Command::Eval {
            checkpoint,
            dataset,
            mode,
            degree,
        } => {
            if let Some(c) = checkpoint {
                set("checkpoint", path_value(c));
            }
            if let Some(d) = dataset {
                set("dataset", path_value(d));
            }
            if let Some(m) = mode {
                set("mode", serde_json::to_value(m).expect("mode serializes"));
            }
            if let Some(r) = degree {
                set("degree", (*r).into());
            }
            let cfg: EvalConfig = resolve(g.config.as_deref(), &overrides)?;
            cmd_eval(&cfg, out).map(|_| ())
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = if cli.global.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
