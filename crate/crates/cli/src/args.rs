//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lspacf::{BasisFamily, TestKind};

use crate::output::Tuning;

#[derive(Debug, Parser)]
#[command(
    name = "lspacf",
    version,
    about = "Time-varying partial autocorrelation: simulation, estimation, tests and tuning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a benchmark series to CSV.
    Simulate(SimulateArgs),
    /// Exact local PACF curves of a benchmark model.
    Oracle(OracleArgs),
    /// Fit a time-varying AR(lag) model and emit its coefficient curves.
    Estimate(EstimateArgs),
    /// Run a significance, white-noise or constancy test.
    Test(TestArgs),
    /// Resolve c, m (and h) without running the final test.
    Tune(TuneArgs),
    /// Estimated PACF curves for lags 1..L, with optional SVG.
    PacfPlot(PacfPlotArgs),
    /// Single-lag p-values for lags 1..L, with optional SVG.
    PvalueSweep(PvalueSweepArgs),
    /// Run a Monte Carlo size, MISE or power experiment.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Stationary AR(2) with coefficients (δ1, δ2).
    Ar2,
    /// AR(2) with coefficients (δ1 sin 2πt, δ2 cos 2πt) and time-varying scale.
    Tvar2,
    /// Stationary MA(1) with coefficient δ1.
    Ma1,
    /// MA(1) with coefficient δ1 sin 2πt.
    Tvma1,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "tvar2")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub delta1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with one numeric column (header optional).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Column name or 1-based index for multi-column files.
    #[arg(long)]
    pub column: Option<String>,
    /// Subtract the sample mean before fitting.
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    #[arg(long, default_value = "legendre")]
    pub basis: BasisFamily,
    /// Basis size: `auto` (cross-validation) or a positive integer.
    #[arg(short, long, default_value = "auto")]
    pub c: Tuning,
    /// Block size: `auto` (minimum volatility) or a positive integer.
    #[arg(short, long, default_value = "auto")]
    pub m: Tuning,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(short = 'B', long = "replicates", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short, long, default_value_t = 600)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest lag L.
    #[arg(short, long, default_value_t = 3)]
    pub lags: usize,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Autoregressive order of the fit.
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[arg(long, default_value = "legendre")]
    pub basis: BasisFamily,
    #[arg(short, long, default_value = "auto")]
    pub c: Tuning,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `lag`, `whitenoise` or `constancy`.
    #[arg(long, default_value = "lag")]
    pub kind: TestKind,
    /// Tested lag, or white-noise order h (`auto` when omitted).
    #[arg(long)]
    pub lag: Option<usize>,
    /// Cap for automatic white-noise order selection.
    #[arg(long, default_value_t = lspacf::tune::DEFAULT_MAX_H)]
    pub max_h: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub type TuneArgs = TestArgs;

#[derive(Debug, Clone, Args)]
pub struct PacfPlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value_t = 5)]
    pub lags: usize,
    #[arg(long, default_value = "legendre")]
    pub basis: BasisFamily,
    #[arg(short, long, default_value = "auto")]
    pub c: Tuning,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PvalueSweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value_t = 10)]
    pub lags: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Scenario id, e.g. `size/ar2/fourier/s5/0.05`.
    #[arg(long, required_unless_present = "list")]
    pub scenario: Option<String>,
    /// Print every scenario id and exit.
    #[arg(long)]
    pub list: bool,
    /// Monte Carlo replicates.
    #[arg(short = 'R', long, default_value_t = 1000)]
    pub replicates: usize,
    /// Bootstrap replicates per test.
    #[arg(short = 'B', long, default_value_t = crate::bench::BENCH_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, required_unless_present = "list")]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
