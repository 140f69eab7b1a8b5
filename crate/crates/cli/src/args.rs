use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "filtra",
    version,
    about = "Intrinsic metrics and standardness diagnostics for leveled Markov chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intrinsic metric ladders on a Bratteli graph.
    Metrics(MetricsArgs),
    /// V′ and tail-criterion diagnostics with a hedged verdict.
    Standardness(StandardnessArgs),
    /// Propp–Wilson decay tables and coupling cascades.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// SVG drawing of a graph under its intrinsic line embedding.
    Embed(EmbedArgs),
    /// Eulerian numbers and the A₀,₁ table with its path-count check.
    Eulerian(EulerianArgs),
    /// Writes a graph or chain as a versioned JSON document.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Pascal,
    Euler,
    Multipascal,
    Odometer,
    NextJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainKind {
    Pascal,
    Euler,
    Multipascal,
    SquareWalk,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Auto,
    Lp,
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    MinKantorovich,
    Median,
}

/// Numeric mode; exact rationals unless `--float`.
#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    /// Exact rational arithmetic (default where supported).
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Double-precision arithmetic.
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file (atomically) instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Chain and graph parameters shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Bernoulli parameter of the Pascal chain.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// Dimension of the d-dimensional Pascal graph.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Multinomial weights, comma separated (default uniform).
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<String>>,
    /// Coordinate weights of the initial metric (default uniform).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    /// Intensity rule of the Poisson chain, e.g. "lambda=|n|+1".
    #[arg(long)]
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long, value_enum)]
    pub graph: GraphKind,
    /// Number of levels below the root.
    #[arg(long)]
    pub depth: i64,
    /// Compare every level with the closed form; exit 3 on mismatch.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum, default_value = "embedding")]
    pub strategy: Strategy,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StandardnessArgs {
    #[arg(long, value_enum, conflicts_with = "chain_file")]
    pub chain: Option<ChainKind>,
    /// A chain document written by `export --chain`.
    #[arg(long)]
    pub chain_file: Option<PathBuf>,
    /// Window depths |m|, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0.05)]
    pub floor: f64,
    #[arg(long, default_value_t = 0.05)]
    pub decay_tol: f64,
    #[arg(long, value_enum, default_value = "embedding")]
    pub strategy: Strategy,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Propp–Wilson coupling from a fixed past state.
    Pw(PwArgs),
    /// The Z^j coupling cascade.
    Cascade(CascadeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PwArgs {
    #[arg(long, value_enum)]
    pub chain: ChainKind,
    /// Observation level.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub n: i32,
    /// Depths |m| of the fixed past state, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ms: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "min-kantorovich")]
    pub policy: Policy,
    /// Largest joint state space for the exact expectation.
    #[arg(long, default_value_t = 4_000_000)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CascadeArgs {
    #[arg(long, value_enum)]
    pub chain: ChainKind,
    /// Start depths |n_j|, increasing, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "25,50,75,100")]
    pub starts: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "min-kantorovich")]
    pub policy: Policy,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub graph: GraphKind,
    #[arg(long, default_value_t = 12)]
    pub depth: i64,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EulerianArgs {
    /// Print the single row A(n, ·).
    #[arg(long)]
    pub n: Option<u32>,
    /// Depth of the A₀,₁ table and the path-count check.
    #[arg(long, default_value_t = 8)]
    pub depth: i64,
    /// Exit 3 when the formula and the path counts disagree.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, required_unless_present = "chain", conflicts_with = "chain")]
    pub graph: Option<GraphKind>,
    #[arg(long, value_enum)]
    pub chain: Option<ChainKind>,
    #[arg(long)]
    pub depth: i64,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}
