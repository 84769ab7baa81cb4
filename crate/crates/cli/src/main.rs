//! `rsg`: performance bounds, sharing simulations and RUS Monte Carlo for
//! resource-state generators, written as plot-ready CSV and JSON.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Default seed when neither the flag nor the config sets one.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "rsg", version, about = "Resource-state generator analyses", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Settings and custom schemes (`[settings]`, `[scheme NAME]` sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Transmission threshold on the resource-state photons.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Target RSG rate `r`.
    #[arg(long = "rate-r", global = true)]
    pub rate_r: Option<f64>,
    /// Internal clock rate `r0`.
    #[arg(long = "rate-r0", global = true)]
    pub rate_r0: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Performance bounds, stage tables and boosting variants.
    Tables(TablesArgs),
    /// Resource efficiency versus loss per component.
    Tradeoff(TradeoffArgs),
    /// Heralded-source success probability under a multi-photon error budget.
    Heralded(HeraldedArgs),
    /// RUS-module Monte Carlo.
    Rus(RusArgs),
    /// Graph-state operations on an edge list or adjacency JSON.
    Graph(GraphArgs),
    /// Re-runs the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// Boosting level of the fusion gates.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=3))]
    pub boost: u32,
    /// Also report the maximal loss per component at this optical depth.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Unit cost of the hybrid scheme, in photons.
    #[arg(long)]
    pub hybrid_unit_cost: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchName {
    Hsps,
    Dsps,
    Caterpillar,
    Rus,
    RusMultiplexed,
    /// Every architecture, plus a JSON bundle.
    All,
}

#[derive(Debug, Clone, Args)]
pub struct TradeoffArgs {
    #[arg(long, value_enum)]
    pub arch: ArchName,
    /// Heralding probability of the HSPS architecture.
    #[arg(long = "ps", default_value_t = 0.05)]
    pub p_s: f64,
    /// Explicit loss grid; overrides the geometric grid.
    #[arg(long = "x", value_delimiter = ',')]
    pub x_values: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub x_min: f64,
    /// Defaults to the architecture's maximal loss.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    /// Target success probability per RSG period.
    #[arg(long)]
    pub p_target: Option<f64>,
    /// Emitter collection efficiency (RUS architectures).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Monte Carlo samples per RUS evaluation.
    #[arg(long, default_value_t = 4)]
    pub samples: u32,
    /// Internal cycles per Monte Carlo sample.
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
}

#[derive(Debug, Clone, Args)]
pub struct HeraldedArgs {
    /// Multi-photon error budgets.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.002,0.005,0.01")]
    pub eps: Vec<f64>,
    /// Explicit herald-efficiency grid; overrides the range flags.
    #[arg(long = "eta-grid", value_delimiter = ',')]
    pub eta_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 101)]
    pub eta_points: usize,
    /// Heralding probability whose efficiency threshold is tabulated per budget.
    #[arg(long, default_value_t = 0.245)]
    pub ps_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossModelName {
    PerAttempt,
    PerPhoton,
}

#[derive(Debug, Clone, Args)]
pub struct RusArgs {
    /// Three-spin groups (12 sources at d = 4).
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Loss per component on the gate photons.
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long)]
    pub p_target: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 4)]
    pub samples: u32,
    #[arg(long, value_enum, default_value_t = LossModelName::PerAttempt)]
    pub loss_model: LossModelName,
    /// Largest period searched, in internal cycles.
    #[arg(long, default_value_t = 1000.0)]
    pub tau_cap: f64,
    /// Also tabulate efficiency against these group counts.
    #[arg(long = "d-values", value_delimiter = ',')]
    pub d_values: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphAction {
    /// Minimum edge count over the LC orbit.
    MinEdges,
    /// Local complementation at `--vertex` or along `--sequence`.
    Lc,
    /// Pauli measurement of `--vertex` in `--basis`.
    Measure,
    /// RUS rounds from an edge colouring.
    Schedule,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[arg(value_enum)]
    pub action: GraphAction,
    /// Edge list (`u v` per line) or adjacency JSON (`.json`).
    pub file: PathBuf,
    #[arg(long)]
    pub vertex: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sequence: Vec<usize>,
    #[arg(long, default_value = "Y")]
    pub basis: String,
    /// Orbit search node cap.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Maps an error to the documented exit codes: 2 for bad input, 3 for an
/// infeasible request, 4 for numeric non-convergence, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    use rsg_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Infeasible(_) => 3,
                E::NonConvergence(_) => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<commands::UsageError>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match commands::run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
