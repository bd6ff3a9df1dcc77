use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ddab", version, about = "Path guarding with limited sensing: games, bounds and verification")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Global {
    /// JSON config (run config for `run`, sweep spec for `sweep`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed override for randomized strategies and generated corpora.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs sequentially, default is all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Record per-partition advantages in traces.
    #[arg(long, global = true)]
    pub trace_advantages: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one game from `--config`; writes the trace to `--out`.
    Run,
    /// CSV of the required defender budget for k = 0..=k-max.
    BoundTable(BoundTableArgs),
    /// Sufficiency and necessity brackets over a corpus.
    Verify(VerifyArgs),
    /// Writes a necessity gadget environment as JSON.
    GadgetGen(GadgetArgs),
    /// Re-executes a trace and checks every record.
    Replay(ReplayArgs),
    /// Starts the play server.
    Serve(ServeArgs),
    /// Batch of games over a grid of k, budgets, strategies and seeds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct BoundTableArgs {
    #[arg(long, default_value_t = 23)]
    pub path_len: usize,
    #[arg(long, default_value_t = 10)]
    pub k_max: u32,
    #[arg(long, default_value = "1")]
    pub attacker_total: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusKind {
    Desk,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    /// Mutation hook: platoons never move.
    FrozenPlatoons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReentryArg {
    Abstract,
    Concrete,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = CorpusKind::Desk)]
    pub corpus: CorpusKind,
    /// Extra environment files (sufficiency only).
    #[arg(long = "env")]
    pub envs: Vec<PathBuf>,
    /// Sensing radius used for `--env` files.
    #[arg(short, long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = ReentryArg::Abstract)]
    pub reentry: ReentryArg,
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    #[arg(long)]
    pub path_len: usize,
    #[arg(short, long)]
    pub k: u32,
    /// 0-based index of the middle target; defaults to the middle of the path.
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub ring: bool,
    #[arg(long)]
    pub chain_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub trace: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory with the web UI bundle.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub path_len: Option<usize>,
    #[arg(long)]
    pub k_min: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
    /// `eq9`, `eq9-minus-1`, or a comma list of budgets.
    #[arg(long)]
    pub x_rule: Option<String>,
    /// Comma list of `random`, `greedy`, `gadget`.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Number of seeds for randomized strategies.
    #[arg(long)]
    pub seeds: Option<u64>,
}
