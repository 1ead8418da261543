use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lodcdf_core::LeftoverPolicy;

pub const SEED_ENV: &str = "LODCDF_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "lodcdf", version, about = "Nonparametric CDF estimation for left-censored data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the CDF (with standard errors) from a data file.
    Estimate(EstimateArgs),
    /// Compare the product-limit and reversed-hazard estimates jump by jump.
    Compare(CompareArgs),
    /// Run one Monte Carlo comparison study.
    Simulate(SimulateArgs),
    /// Run a study for each value of a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ProductLimit,
    RhrMle,
    CrhfExp,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    AtFirstExact,
    AtZero,
}

impl From<PolicyArg> for LeftoverPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::AtFirstExact => LeftoverPolicy::AtFirstExact,
            PolicyArg::AtZero => LeftoverPolicy::AtZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Time,
    Random,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV file of `value,detected` rows.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Comma-separated points at which to evaluate the estimates.
    #[arg(long = "at", value_delimiter = ',', allow_negative_numbers = true)]
    pub eval_points: Vec<f64>,
    /// Where the mass below the first exact value goes for the mean.
    #[arg(long, value_enum, default_value = "at-first-exact")]
    pub policy: PolicyArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// CSV file of `value,detected` rows.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args, Clone)]
pub struct StudyArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value = "time")]
    pub scheme: SchemeArg,
    /// Limits of detection for the time scheme.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub lods: Vec<f64>,
    /// Log-location of the censoring distribution (random scheme).
    #[arg(long = "mu-c", default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_c: f64,
    /// Log-scale of the censoring distribution (random scheme).
    #[arg(long = "sigma-c", default_value_t = 1.0)]
    pub sigma_c: f64,
    /// Sample size per replication.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Number of replications.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    /// Include every replication's distance pair.
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    /// Fixed parameter, e.g. `mu=0`.
    #[arg(long, allow_hyphen_values = true)]
    pub fix: Vec<String>,
    /// Varying parameter: `sigma=START:END:COUNT` or `mu=V1,V2,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
}
