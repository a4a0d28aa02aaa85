use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mcrelay",
    version,
    about = "Two-hop molecular relay link: analysis and simulation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Configuration file; omitted keys keep built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV output path; a manifest is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub snapshots: Option<u64>,
    /// Worker threads for parallel sweeps and simulations.
    #[arg(long, global = true, env = "MCRELAY_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binding response curve of one hop.
    Psi(PsiArgs),
    /// End-to-end bit error probability.
    Ber(BerArgs),
    /// Optimal error probability over a parameter grid.
    Sweep(SweepArgs),
    /// Relay link against direct transmission with the same budget.
    CompareDirect(CompareArgs),
    /// Complex counts at both receivers over one realization.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HopChoice {
    First,
    Second,
    Direct,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(long, default_value_t = 0.01)]
    pub t_min: f64,
    #[arg(long, default_value_t = 2.1)]
    pub t_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = HopChoice::First)]
    pub hop: HopChoice,
    /// Add a Monte Carlo estimate and its standard error at each point.
    #[arg(long)]
    pub mc_validate: bool,
    #[arg(long, default_value_t = 100_000)]
    pub molecules: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BerMode {
    Analytical,
    Simulate,
    Both,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    #[arg(long, value_enum, default_value_t = BerMode::Analytical)]
    pub mode: BerMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    RelayPosition,
    Allocation,
    KonKoffGrid,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Grid values: d_sr/d_sd ratios or N_A counts.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [2e3, 1e4])]
    pub k_on: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [10.0, 100.0])]
    pub k_off: Vec<f64>,
    /// Append a Monte Carlo estimate at each grid point.
    #[arg(long)]
    pub simulate: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Molecules of the direct link; defaults to the budget.
    #[arg(long)]
    pub n_direct: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, default_value_t = 1)]
    pub bit: u8,
    #[arg(long, default_value_t = 0)]
    pub snapshot: u64,
}
