use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::List;

/// Monte Carlo driver for oriented percolation on perturbed lattices.
#[derive(Parser, Debug)]
#[command(name = "perclat", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `key = value` parameter file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed [env: PERCLAT_SEED, default 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for default output names [env: PERCLAT_OUT_DIR, default .].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Output file; defaults to `<out-dir>/<command>.<csv|json>`.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Open fraction of coupled bonds against (1 - 1/2L)^2.
    PhatSweep(PhatArgs),
    /// Finite-horizon survival curve in p or L.
    Survival(SurvivalArgs),
    /// Distribution of the normalized path count |N̄_T|.
    Martingale(MartingaleArgs),
    /// Bisection for the parameter where survival crosses a threshold.
    Critical(CriticalArgs),
    /// Compare the two restricted path measures on cylinder events.
    CheckMeasures(MeasuresArgs),
    /// Open-path counts per level for individual bond fields.
    CountPaths(CountArgs),
}

#[derive(Args, Debug, Default)]
pub struct PhatArgs {
    /// Comma-separated amplitudes.
    #[arg(long)]
    pub grid_l: Option<List<f64>>,
    /// Lattice dimension of the sampled bonds.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct SurvivalArgs {
    /// Comma-separated bond probabilities (Bernoulli model).
    #[arg(long)]
    pub grid_p: Option<List<f64>>,
    /// Comma-separated amplitudes (coupled model).
    #[arg(long)]
    pub grid_l: Option<List<f64>>,
    #[arg(long)]
    pub dstar: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct MartingaleArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub dstar: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Cutoff for the surviving-mass fraction.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Extra levels to summarize, comma-separated.
    #[arg(long)]
    pub checkpoints: Option<List<u64>>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct CriticalArgs {
    /// `p` or `l`.
    #[arg(long)]
    pub axis: Option<commands::Axis>,
    #[arg(long)]
    pub dstar: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Trials per evaluation before escalation.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub max_trials: Option<u64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub high: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct MeasuresArgs {
    /// Event definition file (JSON); without it the bundled battery runs.
    #[arg(long)]
    pub event: Option<PathBuf>,
    /// Path length, required with --event.
    #[arg(long)]
    pub t: Option<usize>,
    /// Amplitude L, required with --event.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Trials per side.
    #[arg(long)]
    pub trials: Option<u64>,
    /// `enumerate` or `sample`.
    #[arg(long)]
    pub mode: Option<commands::SumMode>,
    /// Largest number of paths enumerated.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Paths drawn per trial in sample mode.
    #[arg(long)]
    pub sample_paths: Option<u64>,
    /// Random paths for the per-path check (battery only).
    #[arg(long)]
    pub nkey_paths: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct CountArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "l")]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub dstar: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Number of independent fields.
    #[arg(long)]
    pub trials: Option<u64>,
    /// `exact` or `scaled`.
    #[arg(long)]
    pub mode: Option<commands::Arith>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("perclat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
