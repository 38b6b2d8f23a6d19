//! `dbar`: simulate EIT measurements, reconstruct conductivities with the
//! regularized D-bar method, generate training datasets, score predictions
//! and time the solvers.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

mod colormap;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "dbar",
    version,
    about = "D-bar EIT simulation and reconstruction"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a (noisy) DtN matrix for a phantom.
    Simulate(SimulateArgs),
    /// Reconstruct a conductivity image from a DtN file.
    Reconstruct(ReconstructArgs),
    /// Generate a dataset directory of samples and a manifest.
    Dataset(DatasetArgs),
    /// Score predictions against a dataset's ground truth.
    Eval(EvalArgs),
    /// Time the Richardson and direct D-bar solvers.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleArg {
    Kit4,
    Act4,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Richardson,
    Direct,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CgoArg {
    Full,
    Born,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Validation,
}

#[derive(Args, Debug, serde::Serialize)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["seed", "phantom"])))]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "kit4")]
    pub style: StyleArg,
    /// Phantom generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Phantom JSON file instead of a generated one.
    #[arg(long)]
    pub phantom: Option<PathBuf>,
    /// Relative noise level δ.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed of the measurement noise (default: derived from --seed).
    #[arg(long)]
    #[serde(skip)]
    pub noise_seed: Option<u64>,
    #[arg(long, default_value_t = dbar_core::forward::DEFAULT_MESH_LEVEL)]
    pub mesh_level: u32,
    /// Trigonometric patterns per sign (matrix size 2N + 1).
    #[arg(long, default_value_t = dbar_core::forward::DEFAULT_PATTERNS)]
    pub patterns: usize,
    /// Output DtN file (default: $DBAR_DATA_DIR/dtn_<style>_<seed>.dbar).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct ReconstructArgs {
    /// DtN file written by `simulate`.
    #[arg(long)]
    pub dtn: PathBuf,
    /// Radius of the boundary-data disk.
    #[arg(long = "Rdelta", default_value_t = 4.0)]
    pub r_delta: f64,
    /// Truncation radius (default: --Rdelta).
    #[arg(long = "R")]
    #[serde(skip)]
    pub r: Option<f64>,
    /// k-grid has 2^l × 2^l points.
    #[arg(long = "l", default_value_t = dbar_core::dbar::DEFAULT_LEVEL)]
    pub level: u32,
    #[arg(long, default_value_t = dbar_core::dbar::DEFAULT_ITERATIONS)]
    pub iters: usize,
    /// Output image width and height in pixels.
    #[arg(long, default_value_t = dbar_core::dataset::DEFAULT_WIDTH)]
    pub zgrid: usize,
    #[arg(long, value_enum, default_value = "richardson")]
    pub solver: SolverArg,
    /// Phantom JSON, required when --R exceeds --Rdelta.
    #[arg(long)]
    pub phantom: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    pub cgo: CgoArg,
    #[arg(long, default_value_t = dbar_core::scattering::DEFAULT_K_SPACING)]
    pub k_spacing: f64,
    /// Output image file; a PNG is written next to it.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct DatasetArgs {
    #[arg(long, value_enum, default_value = "kit4")]
    pub style: StyleArg,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    /// Number of samples (default: 3280/820 for KIT4, 3200/800 for ACT4).
    #[arg(long)]
    #[serde(skip)]
    pub count: Option<usize>,
    /// Seed of the first sample (default: 0 for train, 1000000 for validation).
    #[arg(long)]
    #[serde(skip)]
    pub seed: Option<u64>,
    /// Output directory (default: $DBAR_DATA_DIR/<style>_<split>).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Keep valid sample files from an interrupted run.
    #[arg(long)]
    pub resume: bool,
    #[arg(long = "l", default_value_t = dbar_core::dbar::DEFAULT_LEVEL)]
    pub level: u32,
    #[arg(long, default_value_t = dbar_core::dataset::DEFAULT_WIDTH)]
    pub zgrid: usize,
    /// Enhancement radii, ascending.
    #[arg(long, value_delimiter = ',', default_value = "6,7,8")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = dbar_core::forward::DEFAULT_MESH_LEVEL)]
    pub mesh_level: u32,
    /// Spacing of the k-points where the scattering transform is evaluated.
    #[arg(long, default_value_t = dbar_core::scattering::DEFAULT_K_SPACING)]
    pub k_spacing: f64,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct EvalArgs {
    /// Directory of prediction files named like the ground-truth samples.
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset directory with a manifest.
    #[arg(long)]
    pub gt: PathBuf,
    /// Channel of rank-3 prediction files to score.
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
    /// CSV output (default: $DBAR_DATA_DIR/metrics.csv).
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct BenchArgs {
    /// Grid exponents to time.
    #[arg(long = "l", value_delimiter = ',', default_value = "5,6,7")]
    pub levels: Vec<u32>,
    /// Number of z points per solver.
    #[arg(long, default_value_t = 4)]
    pub points: usize,
    /// Truncation radius of the synthetic scattering field.
    #[arg(long = "R", default_value_t = 4.0)]
    pub r: f64,
    #[arg(long, default_value_t = dbar_core::dbar::DEFAULT_ITERATIONS)]
    pub iters: usize,
    /// CSV output for the timing table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub enum Failure {
    Usage(String),
    Runtime(dbar_core::Error),
}

impl From<dbar_core::Error> for Failure {
    fn from(e: dbar_core::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, cli.threads),
        Command::Reconstruct(a) => commands::reconstruct(a, cli.threads),
        Command::Dataset(a) => commands::dataset(a, cli.threads),
        Command::Eval(a) => commands::eval(a, cli.threads),
        Command::Bench(a) => commands::bench(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
