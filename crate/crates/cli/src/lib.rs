//! Command-line harness: benchmarks, parameter estimation, spectra,
//! theoretical rate curves and residual polynomial tables, all written as
//! CSV/JSON files with fixed formatting so runs are byte-reproducible.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod fit;
pub mod output;

pub use config::{ExperimentConfig, MethodConfig, MethodKind, Param};

#[derive(Debug, Parser)]
#[command(name = "spectral-accel", version, about = "Average-case optimal methods for quadratics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all subcommands. Each subcommand reads the ones it needs.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment config (TOML, or JSON by `.json` extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Base seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of seeds (overrides the config).
    #[arg(long, global = true)]
    pub seeds: Option<usize>,
    /// Iterations T (overrides the config).
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Hutchinson probes for oracle-based estimates.
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    /// Power iterations for oracle-based estimates.
    #[arg(long = "power-iters", global = true)]
    pub power_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured method on every seed and write per-run and
    /// aggregate convergence curves.
    Bench,
    /// Fit all density models to a matrix from oracle estimates.
    Estimate(InputArgs),
    /// Eigenvalues of a matrix and the pdf of the fitted MP law.
    Spectrum(InputArgs),
    /// Expected error curves `R² ∫ P_t² λ^β dμ` of a method under a model.
    Rates(RatesArgs),
    /// Residual polynomial values on a grid.
    Polys(PolysArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum AssemblyArg {
    /// The file holds H.
    #[default]
    Hessian,
    /// The file holds A and H = AᵀA/d.
    Gram,
    /// The file holds A and H = AᵀA.
    GramUnnormalized,
}

impl From<AssemblyArg> for spectral_accel::problems::Assembly {
    fn from(a: AssemblyArg) -> Self {
        match a {
            AssemblyArg::Hessian => Self::Hessian,
            AssemblyArg::Gram => Self::Gram,
            AssemblyArg::GramUnnormalized => Self::GramUnnormalized,
        }
    }
}

/// A Matrix Market file, or the problem of `--config` when omitted.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    pub matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AssemblyArg::Hessian)]
    pub assembly: AssemblyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Mp,
    Exp,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateMethod {
    /// The optimal method of the model.
    Optimal,
    MpOpt,
    /// MP-OPT polynomials averaged with their norms.
    MpAveraged,
    MpAsympt,
    Exp,
    Unif,
    Gd,
    Polyak,
    Nesterov,
    Chebyshev,
    ModifiedChebyshev,
}

/// Density parameters shared by `rates` and `polys`.
#[derive(Debug, Clone, Args)]
pub struct ModelParams {
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    /// Lower spectrum edge ℓ (default: from the model).
    #[arg(long)]
    pub ell: Option<f64>,
    /// Upper spectrum edge L (default: from the model).
    #[arg(long = "big-l")]
    pub big_l: Option<f64>,
    /// Gradient descent step (default: 1/L).
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Mp)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = RateMethod::Optimal)]
    pub method: RateMethod,
    /// Initialization scale R.
    #[arg(long = "init-scale", default_value_t = 1.0)]
    pub init_scale: f64,
    #[command(flatten)]
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gd,
    Chebyshev,
    Mp,
    MpAveraged,
    Exp,
    Unif,
    Polyak,
    Nesterov,
    ModifiedChebyshev,
}

#[derive(Debug, Clone, Args)]
pub struct PolysArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gd,chebyshev,mp")]
    pub families: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub degrees: Vec<usize>,
    /// Number of grid points on `[0, lambda_max]`.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Right end of the grid (default: the MP upper edge).
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[command(flatten)]
    pub params: ModelParams,
}

/// Runs the parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Bench => commands::bench::run(&cli.global),
        Command::Estimate(input) => commands::estimate::run(&cli.global, input),
        Command::Spectrum(input) => commands::spectrum::run(&cli.global, input),
        Command::Rates(args) => commands::rates::run(&cli.global, args),
        Command::Polys(args) => commands::polys::run(&cli.global, args),
    }
}
