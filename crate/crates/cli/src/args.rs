//! Command-line flags. Every flag may also come from a JSON config file with
//! one section per subcommand; values given on the command line win.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Deserialize;

use crate::exit::usage;

pub const SEED_ENV: &str = "WIRL_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "wirl",
    version,
    about = "Recover scalarization weights from expert decisions"
)]
pub struct Cli {
    /// JSON file with default flag values, e.g. {"learn": {"iters": 500}}.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a realizable dataset from a hidden weight vector.
    Generate(GenerateArgs),
    /// Run the projected subgradient learner on a dataset.
    Learn(LearnArgs),
    /// Re-check a learning trace against the dataset.
    Verify(VerifyArgs),
    /// Merge traces into one long-format CSV for plotting.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenerateArgs {
    /// knapsack, finite-set, vertex or qp.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Defaults to $WIRL_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Items per knapsack instance.
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub max_weight: Option<u32>,
    #[arg(long)]
    pub capacity_ratio: Option<f64>,
    /// Points per finite set or polytope.
    #[arg(long)]
    pub points: Option<usize>,
    /// QP candidates lie in {-grid..grid}^dim.
    #[arg(long)]
    pub grid: Option<i32>,
    /// Box half-width of the QP parameter space.
    #[arg(long)]
    pub b0: Option<f64>,
    /// Hidden weights as JSON, or @file.
    #[arg(long)]
    pub phi0: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// constant:A, invsqrt:C or harmonic:C.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Stop once F_best <= eps. Only meaningful when min F = 0 is known.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Starting point as JSON, or @file; defaults to the center of the space.
    #[arg(long)]
    pub init: Option<String>,
    /// simplex:D, box:D:B0, spectrahedron:D or quad:D:B0.
    #[arg(long)]
    pub space: Option<String>,
    /// Trace CSV; stdout when omitted.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON summary file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Leave the bound column empty.
    #[arg(long, action = ArgAction::SetTrue)]
    pub no_bound: bool,
    /// Recorded in the summary; defaults to $WIRL_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Summary from `learn`; without it the default space and start point are assumed.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Random cases per spot check.
    #[arg(long)]
    pub checks: Option<usize>,
    /// Seed for spot-check sampling; defaults to $WIRL_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ReportArgs {
    /// Trace CSV files.
    pub traces: Vec<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    generate: GenerateArgs,
    learn: LearnArgs,
    verify: VerifyArgs,
    report: ReportArgs,
}

macro_rules! overlay {
    ($ty:ty { $($opt:ident),* } $(flags { $($flag:ident),* })?) => {
        impl $ty {
            fn overlay(self, file: Self) -> Self {
                Self {
                    $($opt: self.$opt.or(file.$opt),)*
                    $($($flag: self.$flag || file.$flag,)*)?
                }
            }
        }
    };
}

overlay!(GenerateArgs {
    family,
    dim,
    samples,
    seed,
    items,
    max_weight,
    capacity_ratio,
    points,
    grid,
    b0,
    phi0,
    out
});
overlay!(LearnArgs { data, schedule, iters, eps, init, space, trace, summary, seed } flags { no_bound });
overlay!(VerifyArgs {
    data,
    trace,
    summary,
    checks,
    seed
});

impl ReportArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            traces: if self.traces.is_empty() {
                file.traces
            } else {
                self.traces
            },
            out: self.out.or(file.out),
        }
    }
}

/// Fills flags missing from the command line with values from `--config`.
pub fn apply_config(cli: Cli) -> Result<Command> {
    let Some(path) = &cli.config else {
        return Ok(cli.command);
    };
    let file = load_config(path)?;
    Ok(match cli.command {
        Command::Generate(a) => Command::Generate(a.overlay(file.generate)),
        Command::Learn(a) => Command::Learn(a.overlay(file.learn)),
        Command::Verify(a) => Command::Verify(a.overlay(file.verify)),
        Command::Report(a) => Command::Report(a.overlay(file.report)),
    })
}

fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// `flag`, else `$WIRL_SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("missing required flag --{flag}")))
}
