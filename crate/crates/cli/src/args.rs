use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Causal discovery rate diagnostics for bivariate data.
#[derive(Debug, Parser)]
#[command(name = "cddr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the discovery-rate curve of a dataset.
    Diagnose(DiagnoseArgs),
    /// Generate a dataset from one of the built-in simulation settings.
    Simulate(SimulateArgs),
    /// Check normal-approximation SEs and CIs against replicated estimates.
    ValidateClt(ValidateCltArgs),
}

/// Options shared by the commands that estimate curves. Every option may
/// also be set in the `--config` file; flags win.
#[derive(Debug, Args, Default, Clone)]
pub struct CurveArgs {
    /// lingam or testbased
    #[arg(long)]
    pub method: Option<String>,
    /// Direction whose rate is highlighted: x_to_y or y_to_x
    #[arg(long)]
    pub hypothesized: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Subsamples drawn per subsample size
    #[arg(long)]
    pub subsamples: Option<usize>,
    /// Comma-separated subsample sizes
    #[arg(long)]
    pub grid: Option<String>,
    /// Bootstrap replicates for each independence test
    #[arg(long = "bootstrap-b")]
    pub bootstrap_b: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flat key = value file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// csv or pair
    #[arg(long)]
    pub format: Option<String>,
    /// Column name or zero-based index of X
    #[arg(long = "x-col")]
    pub x_col: Option<String>,
    /// Column name or zero-based index of Y
    #[arg(long = "y-col")]
    pub y_col: Option<String>,
    /// identity, log, or exp_decay:b=<rate>[,a=<scale>]
    #[arg(long)]
    pub transform: Option<String>,
    /// Comma-separated columns regressed out of both variables
    #[arg(long)]
    pub confounders: Option<String>,
    #[command(flatten)]
    pub curve: CurveArgs,
}

/// Setting parameters. Unset values keep the setting's defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct SettingArgs {
    /// One of: linear, slightly_nonlinear, nonlinear_p3, gaussian,
    /// slightly_non_gaussian, non_gaussian
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Noise sd as a fraction of the signal sd (linearity settings)
    #[arg(long = "noise-ratio")]
    pub noise_ratio: Option<f64>,
    #[arg(long = "noise-weights")]
    pub noise_weights: Option<String>,
    #[arg(long = "noise-means")]
    pub noise_means: Option<String>,
    #[arg(long = "noise-sds")]
    pub noise_sds: Option<String>,
    /// Rate of the truncated exponential X (linearity settings)
    #[arg(long = "x-rate")]
    pub x_rate: Option<f64>,
    /// Truncation point of X (linearity settings)
    #[arg(long = "x-upper")]
    pub x_upper: Option<f64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub setting: SettingArgs,
    /// Number of observations
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ValidateCltArgs {
    #[command(flatten)]
    pub setting: SettingArgs,
    /// Size of each generated dataset
    #[arg(long = "n-total")]
    pub n_total: Option<usize>,
    /// Independent datasets, at least 10
    #[arg(long)]
    pub replicates: Option<usize>,
    #[command(flatten)]
    pub curve: CurveArgs,
}
