//! Command-line front end: CSV fit reports with classical and robust
//! standard errors, seeded Monte Carlo runs from JSON configs, asymptotic
//! limit tables, and bootstrap information-matrix tests.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for estimation errors.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use sandwich_lab::Estimator;

pub use config::{KdeConfig, SimConfig};
pub use error::{CliError, CliResult};
pub use report::{build_fit_report, Coefficient, FitReport, Provenance};
pub use table::{read_table, read_table_from, write_dataset, write_qq, Loaded, Table};

pub const SEED_ENV: &str = "SANDWICH_LAB_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "sandwich-lab",
    version,
    about = "Classical versus sandwich standard errors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit OLS to a CSV file and report classical and robust standard errors.
    Fit(FitArgs),
    /// Run a Monte Carlo study of standard-error sampling distributions.
    Simulate(SimulateArgs),
    /// Print large-sample limits of the scaled standard errors.
    Limits(LimitsArgs),
    /// Parametric-bootstrap information-matrix test on a CSV file.
    Imtest(ImtestArgs),
    /// Draw one dataset from a simulation config and write it as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV with a header row; outcome first, predictors after.
    pub csv: PathBuf,
    /// Binary predictor, by header name or zero-based predictor index.
    /// Defaults to the only 0/1 predictor if there is exactly one.
    #[arg(long)]
    pub binary_col: Option<String>,
    /// Do not prepend an intercept column.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Master seed; falls back to $SANDWICH_LAB_SEED, then 1.
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Extra robust estimators beside HC0 (hc1, hc2, hc3), comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_robust)]
    pub robust: Vec<Estimator>,
    /// Divide the classical RSS by n - p instead of n.
    #[arg(long)]
    pub classical_dof: bool,
    /// Run the information-matrix test with this many bootstrap draws.
    #[arg(long, value_name = "B")]
    pub imtest: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Write normal Q-Q pairs of the residuals to this CSV file.
    #[arg(long, value_name = "OUT_CSV")]
    pub qq: Option<PathBuf>,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON config; defaults are used for missing keys or a missing file.
    pub config: Option<PathBuf>,
    /// Summary CSV, one row per estimator.
    #[arg(long)]
    pub out_summary: Option<PathBuf>,
    /// Density CSV in long format (estimator, x, density, bandwidth).
    #[arg(long)]
    pub out_density: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Print the summary as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LimitsArgs {
    /// Limiting share of the X = 1 group, in (0, 1).
    #[arg(long, allow_negative_numbers = true, required_unless_present = "sweep")]
    pub mu: Option<f64>,
    /// Disturbance variance when X = 0.
    #[arg(long, default_value_t = 2.0)]
    pub var0: f64,
    /// Disturbance variance when X = 1.
    #[arg(long, default_value_t = 8.0)]
    pub var1: f64,
    /// Also print the limits divided by sqrt(n).
    #[arg(long)]
    pub n: Option<usize>,
    /// Tabulate this many evenly spaced mu values in (0, 1).
    #[arg(long, conflicts_with = "mu")]
    pub sweep: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ImtestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Bootstrap draws (at least 99).
    #[arg(short = 'B', long = "B", alias = "bootstrap", default_value_t = 999)]
    pub bootstrap: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// JSON simulation config; only the design keys are used.
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Stream index under the seed; replicate k of a simulation uses k.
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_robust(s: &str) -> Result<Estimator, String> {
    match s.parse::<Estimator>() {
        Ok(e) if e.is_robust() => Ok(e),
        Ok(_) => Err("classical errors are always reported; pick hc0..hc3".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs one command, writing its primary output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => commands::fit(&a, out),
        Command::Simulate(a) => commands::simulate(&a, out),
        Command::Limits(a) => commands::limits(&a, out),
        Command::Imtest(a) => commands::imtest(&a, out),
        Command::Generate(a) => commands::generate(&a, out),
    }
}
