//! `ca-consensus`: batch experiments with reproducible, file-based outputs.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const RULE_HELP: &str = "Rule spellings:
  e<number>                  elementary rule 0..=255
  r<radius>:<number>         contiguous rule of the given radius (r2:4272826020)
  gkl[:o1,o2,0,o4,o5]        GKL rule, default offsets -3,-1,0,1,3
  maj:<offsets>              majority over an odd offset list (maj:-2,0,3)
  t2d:<vn5|moore9>:<code>    2D totalistic code (t2d:moore9:976)
  maj2d:<dy,dx;...>          2D majority over an odd offset list
  gkl2d                      plus-shaped 2D GKL analog
  shell:<R>[:w0,w1,...]      graph shell majority, weights may be fractions
  sort                       block rule 10 -> 01
  block:<ab>,<ab>,<ab>,<ab>  block rule, images of 00,01,10,11";

#[derive(Parser, Debug)]
#[command(name = "ca-consensus", version, about = "Cellular-automaton consensus experiments", after_help = RULE_HELP)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "CA_CONSENSUS_OUT", default_value = "ca-out")]
    out: PathBuf,
    /// Maximum worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    /// Log progress; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one configuration and write its spacetime diagram.
    Simulate(SimulateArgs),
    /// Enumerate the state transition graph of a small ring and classify every state.
    Stg(StgArgs),
    /// Mean final density over a grid of initial densities and noise levels.
    Phase(PhaseArgs),
    /// Score range-r rules and rank them.
    Search(SearchArgs),
    /// Shell-majority consensus on a graph.
    Graph(GraphArgs),
    /// Multiway graph of all nondeterministic evolutions from one state.
    Multiway(MultiwayArgs),
    /// Smallest set of initial flips that changes the outcome.
    Attack(AttackArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub rule: String,
    /// Cells of a 1D ring.
    #[arg(long, conflicts_with = "size")]
    pub n: Option<usize>,
    /// Grid size HxW for 2D rules.
    #[arg(long)]
    pub size: Option<String>,
    /// Initial 1D configuration as a 0/1 string, instead of a random one.
    #[arg(long, conflicts_with_all = ["p", "size"])]
    pub init: Option<String>,
    /// Probability that an initial cell is 1.
    #[arg(long)]
    pub p: Option<f64>,
    /// Steps, or rendered rows for asynchronous schedules.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "sync")]
    pub schedule: ScheduleArg,
    /// Single-cell updates per rendered row (default 2n).
    #[arg(long)]
    pub updates_per_row: Option<usize>,
    /// Per-cell flip probability after every synchronous step.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Pair set for block rules.
    #[arg(long, value_enum, default_value = "line")]
    pub boundary: BoundaryArg,
    /// Also write the time evolution of this grid row (2D only).
    #[arg(long)]
    pub slice: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleArg {
    Sync,
    Async,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Line,
    Cycle,
}

#[derive(Args, Debug, Serialize)]
pub struct StgArgs {
    #[arg(long)]
    pub rule: String,
    #[arg(long)]
    pub n: usize,
    /// Write stg.dot only up to this many cells.
    #[arg(long, default_value_t = 12)]
    pub dot_limit: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    #[arg(long)]
    pub rule: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Initial densities, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.35,0.4,0.45,0.55,0.6,0.65,0.7")]
    pub p: Vec<f64>,
    /// Noise levels, comma separated (synchronous schedule only).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub q: Vec<f64>,
    #[arg(long, value_enum, default_value = "sync")]
    pub schedule: ScheduleArg,
    #[arg(long)]
    pub updates_per_row: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    /// Score this many rule numbers drawn uniformly from the rule space.
    #[arg(long)]
    pub sample: Option<u64>,
    /// Score rule numbers START..END.
    #[arg(long)]
    pub range: Option<String>,
    /// Score these rule numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rules: Vec<u64>,
    /// Score every rule of the radius. Prints a time estimate and needs --yes.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub yes: bool,
    #[arg(long, value_enum, default_value = "sync")]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 49)]
    pub n: usize,
    /// Steps, or rendered rows for the async regime.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long)]
    pub updates_per_row: Option<usize>,
    /// Noise level for the noisy regime.
    #[arg(long, default_value_t = 0.01)]
    pub q: f64,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    pub trials: usize,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Keep only self-complementary, reflection-symmetric rules.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, default_value_t = 10_000)]
    pub checkpoint_every: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Sync,
    Async,
    Noisy,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Exact,
    Agree,
}

#[derive(Args, Debug, Serialize)]
pub struct GraphArgs {
    /// ring:N, path:N, complete:N, lattice:HxW[:open], regular:N:K, gnm:N:M or file:PATH (edge list or DOT).
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value = "shell:1")]
    pub rule: String,
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Draw a fresh random graph for every trial (regular and gnm only).
    #[arg(long)]
    pub family: bool,
    /// Also score the ring of the same size with paired seeds.
    #[arg(long)]
    pub compare_ring: bool,
    /// Enumerate and classify the graph's state transition graph.
    #[arg(long)]
    pub stg: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct MultiwayArgs {
    /// 1D rule for noise or async branching.
    #[arg(long, conflicts_with = "block")]
    pub rule: Option<String>,
    /// Block rule for asynchronous pair updates on a line.
    #[arg(long)]
    pub block: Option<String>,
    /// Initial configuration as a 0/1 string.
    #[arg(long)]
    pub init: String,
    #[arg(long, value_enum, default_value = "async")]
    pub mode: MultiwayMode,
    /// Generations to expand (default: 3 for noise, unbounded for async).
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub max_nodes: usize,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MultiwayMode {
    Noise,
    Async,
}

#[derive(Args, Debug, Serialize)]
pub struct AttackArgs {
    #[arg(long)]
    pub rule: String,
    #[arg(long, conflicts_with_all = ["n", "p"])]
    pub init: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    #[arg(long, default_value_t = 2)]
    pub max_flips: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(&cli.out, a),
        Command::Stg(a) => commands::stg(&cli.out, a),
        Command::Phase(a) => commands::phase(&cli.out, a),
        Command::Search(a) => commands::search(&cli.out, a),
        Command::Graph(a) => commands::graph(&cli.out, a),
        Command::Multiway(a) => commands::multiway(&cli.out, a),
        Command::Attack(a) => commands::attack(&cli.out, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
