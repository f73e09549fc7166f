use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densewalk::density::Sigma;
use densewalk::generator::AssembleMode;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "densewalk",
    version,
    about = "Density-ranked random-walk initialization and link-prediction benchmarks"
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Treat the lowest density scores as densest.
    #[arg(long, global = true)]
    pub invert_ranking: bool,

    /// How generated scores become a graph for edge overlap.
    #[arg(long, global = true, default_value = "top-k")]
    pub assemble_mode: AssembleMode,

    /// `key = value` file; keys are long flag names. Flags given on the
    /// command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Load an edge list, keep the largest component and split its edges.
    Preprocess(PreprocessArgs),
    /// Rank vertices by density and write the ranking CSV.
    Density(DensityCmd),
    /// Sample training walks.
    Walks(WalksCmd),
    /// Fit a walk generator on a walk file.
    Fit(FitCmd),
    /// Generate walks from a fitted generator.
    Generate(GenerateCmd),
    /// Score generated walks against the held-out edges.
    Evaluate(EvaluateCmd),
    /// Run the uniform vs dense grid and write reports.
    Benchmark(BenchmarkCmd),
    /// Walk entropy from the densest vs the sparsest decile.
    Entropy(EntropyCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Preprocess(_) => "preprocess",
            Command::Density(_) => "density",
            Command::Walks(_) => "walks",
            Command::Fit(_) => "fit",
            Command::Generate(_) => "generate",
            Command::Evaluate(_) => "evaluate",
            Command::Benchmark(_) => "benchmark",
            Command::Entropy(_) => "entropy",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    /// Edge list: `u v [w]` per line, `#` comments.
    #[arg(long)]
    pub input: PathBuf,

    /// The file lists both directions of each edge.
    #[arg(long)]
    pub directed_input: bool,

    #[arg(long, default_value_t = densewalk::split::DEFAULT_VAL_FRAC)]
    pub val_frac: f64,

    #[arg(long, default_value_t = densewalk::split::DEFAULT_TEST_FRAC)]
    pub test_frac: f64,
}

/// Where the working graph comes from: the training part of a split, or a
/// plain edge list reduced to its largest component.
#[derive(Debug, Args, Serialize)]
pub struct GraphSource {
    #[arg(long, conflicts_with = "graph")]
    pub split: Option<PathBuf>,

    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    Exact,
    Mc,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    /// Horizon of the proximity series.
    #[arg(long, default_value_t = 8)]
    pub l_density: usize,

    /// Monte-Carlo walks per source vertex.
    #[arg(long, default_value_t = 100)]
    pub walks_per_vertex: usize,

    /// Restart probability.
    #[arg(long, default_value_t = densewalk::proximity::DEFAULT_RESTART)]
    pub restart: f64,

    /// Influence bandwidth, or `auto`.
    #[arg(long, default_value = "1.0")]
    #[serde(serialize_with = "ser_sigma")]
    pub sigma: Sigma,

    #[arg(long, value_enum, default_value = "mc")]
    pub mode: DensityMode,

    /// Read a ranking CSV instead of computing one.
    #[arg(long)]
    pub ranking: Option<PathBuf>,
}

fn ser_sigma<S: serde::Serializer>(s: &Sigma, ser: S) -> Result<S::Ok, S::Error> {
    match s {
        Sigma::Fixed(v) => ser.serialize_f64(*v),
        Sigma::Auto => ser.serialize_str("auto"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Uniform,
    Dense,
    Weighted,
}

#[derive(Debug, Args, Serialize)]
pub struct WalkArgs {
    /// Steps per walk (a walk visits length + 1 vertices).
    #[arg(long, default_value_t = 2)]
    pub walk_length: usize,

    #[arg(long, default_value_t = 13)]
    pub batch_size: usize,

    #[arg(long, default_value_t = 100)]
    pub num_batches: usize,

    #[arg(long, value_enum, default_value = "uniform")]
    pub strategy: StrategyKind,

    /// Dense-set size (default: max(10, ceil(n / 10))).
    #[arg(long)]
    pub k: Option<usize>,

    /// Share of the dense set replaced by random vertices.
    #[arg(long, default_value_t = 0.0)]
    pub random_mix_frac: f64,

    /// Softmax temperature for the weighted strategy.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct WalksCmd {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub walks: WalkArgs,
    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Markov,
    Replay,
}

#[derive(Debug, Args, Serialize)]
pub struct FitCmd {
    #[command(flatten)]
    pub source: GraphSource,

    /// Training walk file.
    #[arg(long)]
    pub walks: PathBuf,

    #[arg(long, value_enum, default_value = "markov")]
    pub generator: GeneratorKind,

    /// Additive smoothing of the Markov rows.
    #[arg(long, default_value_t = densewalk::generator::DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateCmd {
    #[command(flatten)]
    pub source: GraphSource,

    /// Directory written by `fit`.
    #[arg(long)]
    pub generator_dir: PathBuf,

    #[arg(long)]
    pub count: usize,

    #[arg(long)]
    pub walk_length: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateCmd {
    /// Split directory written by `preprocess`.
    #[arg(long)]
    pub split: PathBuf,

    /// Generated walk file.
    #[arg(long)]
    pub generated: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkCmd {
    #[command(flatten)]
    pub source: BenchmarkSource,

    /// `batch:length` pairs.
    #[arg(long, value_delimiter = ',', default_value = "13:2,19:3,25:4,40:5")]
    #[serde(serialize_with = "ser_configs")]
    pub configs: Vec<GridConfig>,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "uniform,dense")]
    pub strategies: Vec<StrategyKind>,

    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,

    #[arg(long, default_value_t = 100)]
    pub num_batches: usize,

    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 0.0)]
    pub random_mix_frac: f64,

    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,

    #[arg(long, value_enum, default_value = "markov")]
    pub generator: GeneratorKind,

    #[arg(long, default_value_t = densewalk::generator::DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Generated walks per training walk.
    #[arg(long, default_value_t = densewalk::pipeline::DEFAULT_GENERATION_MULTIPLIER)]
    pub generation_multiplier: usize,

    #[command(flatten)]
    pub density: DensityArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkSource {
    #[arg(long, conflicts_with = "input")]
    pub split: Option<PathBuf>,

    /// Edge list to preprocess in memory with the default fractions.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    pub batch_size: usize,
    pub walk_length: usize,
}

impl std::str::FromStr for GridConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (b, l) = s
            .split_once(':')
            .ok_or_else(|| format!("expected batch:length, got `{s}`"))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        Ok(GridConfig {
            batch_size: parse(b)?,
            walk_length: parse(l)?,
        })
    }
}

fn ser_configs<S: serde::Serializer>(c: &[GridConfig], ser: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(c.len()))?;
    for g in c {
        seq.serialize_element(&[g.batch_size, g.walk_length])?;
    }
    seq.end()
}

#[derive(Debug, Args, Serialize)]
pub struct EntropyCmd {
    #[command(flatten)]
    pub source: GraphSource,

    /// Walk lengths to test.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub walk_lengths: Vec<usize>,

    /// Walks per decile and repetition.
    #[arg(long, default_value_t = 1000)]
    pub walks: usize,

    #[arg(long, default_value_t = 50)]
    pub repetitions: usize,

    #[command(flatten)]
    pub density: DensityArgs,
}
