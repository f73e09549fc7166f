use std::fs;
use std::path::Path;

use densewalk::density::{default_dense_k, DensityRanking, RankDirection};
use densewalk::generator::{fit_markov, replay_generator, MarkovGenerator, WalkGenerator};
use densewalk::graph::{largest_connected_component, load_edge_list};
use densewalk::pipeline::evaluate_generated;
use densewalk::proximity::{proximity_exact, proximity_monte_carlo, transition_matrix};
use densewalk::rng::derive_seed;
use densewalk::split::{split_edges, EdgeSplit};
use densewalk::walks::{decile_entropy, export_walks, import_walks, read_walks, sample_walks, Strategy, WalkConfig};
use densewalk::{assemble_scores, density_scores, Error, Graph};
use serde::Serialize;

use crate::args::*;
use crate::{benchmark, CliError};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    fs::create_dir_all(&cli.out_dir).map_err(|e| io_err(&cli.out_dir, e))?;
    write_echo(cli)?;
    match &cli.command {
        Command::Preprocess(a) => preprocess(cli, a),
        Command::Density(a) => density(cli, a),
        Command::Walks(a) => walks(cli, a),
        Command::Fit(a) => fit(cli, a),
        Command::Generate(a) => generate(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Benchmark(a) => benchmark::run(cli, a),
        Command::Entropy(a) => entropy(cli, a),
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'static str,
    seed: u64,
    invert_ranking: bool,
    assemble_mode: densewalk::AssembleMode,
    args: &'a Command,
}

/// Records every parameter that shapes the outputs. Thread count and the
/// output directory are left out because they do not.
fn write_echo(cli: &Cli) -> Result<(), CliError> {
    let echo = Echo {
        command: cli.command.name(),
        seed: cli.seed,
        invert_ranking: cli.invert_ranking,
        assemble_mode: cli.assemble_mode,
        args: &cli.command,
    };
    write_json(&cli.out_dir.join(format!("{}.config.json", cli.command.name())), &echo)
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
    write_text(path, &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e).into())
}

pub(crate) fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

pub(crate) fn param(name: &'static str, msg: impl Into<String>) -> Error {
    Error::InvalidParameter { name, msg: msg.into() }
}

fn direction(cli: &Cli) -> RankDirection {
    if cli.invert_ranking {
        RankDirection::Ascending
    } else {
        RankDirection::Descending
    }
}

/// Loads an edge list and keeps its largest connected component.
pub(crate) fn load_component(path: &Path, directed_input: bool) -> Result<(Graph, Vec<u64>), CliError> {
    let loaded = load_edge_list(path, directed_input)?;
    let s = &loaded.stats;
    log::info!(
        "loaded {}: {} vertices, {} edges ({} duplicate and {} reciprocal lines)",
        path.display(),
        loaded.graph.num_vertices(),
        loaded.graph.num_edges(),
        s.duplicates,
        s.reciprocal
    );
    let (lcc, kept) = largest_connected_component(&loaded.graph)?;
    if lcc.num_vertices() < loaded.graph.num_vertices() {
        log::info!(
            "kept largest component: {} of {} vertices, {} of {} edges",
            lcc.num_vertices(),
            loaded.graph.num_vertices(),
            lcc.num_edges(),
            loaded.graph.num_edges()
        );
    }
    let mapping = kept.iter().map(|&v| loaded.original_ids[v]).collect();
    Ok((lcc, mapping))
}

/// The working graph: a split's training graph or a loaded component.
pub(crate) fn load_source(src: &GraphSource) -> Result<(Graph, Option<EdgeSplit>), CliError> {
    match (&src.split, &src.graph) {
        (Some(dir), _) => {
            let (split, _) = EdgeSplit::read_dir(dir)?;
            Ok((split.train.clone(), Some(split)))
        }
        (None, Some(path)) => Ok((load_component(path, false)?.0, None)),
        (None, None) => Err(CliError::Usage("one of --split or --graph is required".into())),
    }
}

/// Reads or computes the density ranking of `g`.
pub(crate) fn ranking_for(
    g: &Graph,
    d: &DensityArgs,
    seed: u64,
    dir: RankDirection,
) -> Result<DensityRanking, CliError> {
    if let Some(path) = &d.ranking {
        let ranking = DensityRanking::read(path)?;
        if ranking.n() != g.num_vertices() {
            return Err(param(
                "ranking",
                format!("has {} vertices, graph has {}", ranking.n(), g.num_vertices()),
            )
            .into());
        }
        return Ok(ranking.with_direction(dir));
    }
    let r = match d.mode {
        DensityMode::Exact => proximity_exact(&transition_matrix(g), d.l_density, d.restart)?,
        DensityMode::Mc => proximity_monte_carlo(
            g,
            d.l_density,
            d.restart,
            d.walks_per_vertex,
            derive_seed(seed, "density", 0),
        )?,
    };
    Ok(density_scores(&r, d.sigma, dir)?)
}

pub(crate) fn strategy(kind: StrategyKind, k: Option<usize>, mix: f64, temperature: f64, n: usize) -> Strategy {
    match kind {
        StrategyKind::Uniform => Strategy::UniformRandom,
        StrategyKind::Dense => Strategy::DenseTopK {
            k: k.unwrap_or_else(|| default_dense_k(n)),
            random_mix_frac: mix,
        },
        StrategyKind::Weighted => Strategy::DensityWeighted { temperature },
    }
}

fn preprocess(cli: &Cli, a: &PreprocessArgs) -> Result<(), CliError> {
    let (lcc, mapping) = load_component(&a.input, a.directed_input)?;
    let split = split_edges(&lcc, a.val_frac, a.test_frac, derive_seed(cli.seed, "split", 0))?;
    split.write_dir(&cli.out_dir, &mapping)?;
    log::info!(
        "split: {} train, {} val, {} test edges (shortfall {})",
        split.train.num_edges(),
        split.val_edges.len(),
        split.test_edges.len(),
        split.shortfall
    );
    Ok(())
}

fn density(cli: &Cli, a: &DensityCmd) -> Result<(), CliError> {
    let (g, _) = load_source(&a.source)?;
    let ranking = ranking_for(&g, &a.density, cli.seed, direction(cli))?;
    ranking.write(&cli.out_dir.join("ranking.csv"))?;
    Ok(())
}

fn walks(cli: &Cli, a: &WalksCmd) -> Result<(), CliError> {
    let (g, _) = load_source(&a.source)?;
    let w = &a.walks;
    let cfg = WalkConfig {
        walk_length: w.walk_length,
        batch_size: w.batch_size,
        num_batches: w.num_batches,
        strategy: strategy(w.strategy, w.k, w.random_mix_frac, w.temperature, g.num_vertices()),
        seed: derive_seed(cli.seed, "walks", 0),
    };
    let ranking = match w.strategy {
        StrategyKind::Uniform => None,
        _ => Some(ranking_for(&g, &a.density, cli.seed, direction(cli))?),
    };
    let set = sample_walks(&g, &cfg, ranking.as_ref())?;
    export_walks(&set, g.num_vertices(), &cli.out_dir.join("walks.txt"))?;
    Ok(())
}

#[derive(Serialize, serde::Deserialize)]
struct ReplayBundle {
    kind: String,
}

const GENERATOR_DIR: &str = "generator";

fn fit(cli: &Cli, a: &FitCmd) -> Result<(), CliError> {
    let (g, _) = load_source(&a.source)?;
    let train = import_walks(&a.walks, &g)?;
    let dir = cli.out_dir.join(GENERATOR_DIR);
    match a.generator {
        GeneratorKind::Markov => fit_markov(&train, &g, a.alpha)?.save(&dir)?,
        GeneratorKind::Replay => {
            replay_generator(&train)?;
            write_json(&dir.join("generator.json"), &ReplayBundle { kind: "replay".into() })?;
            export_walks(&train, g.num_vertices(), &dir.join("train.walks"))?;
        }
    }
    Ok(())
}

fn load_generator(dir: &Path, g: &Graph) -> Result<Box<dyn WalkGenerator>, CliError> {
    let path = dir.join("generator.json");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let bundle: ReplayBundle = serde_json::from_str(&text).map_err(Error::from)?;
    match bundle.kind.as_str() {
        "markov" => Ok(Box::new(MarkovGenerator::load(dir, g)?)),
        "replay" => Ok(Box::new(replay_generator(&import_walks(&dir.join("train.walks"), g)?)?)),
        other => Err(param("generator", format!("unknown bundle kind `{other}`")).into()),
    }
}

fn generate(cli: &Cli, a: &GenerateCmd) -> Result<(), CliError> {
    let (g, _) = load_source(&a.source)?;
    let gen = load_generator(&a.generator_dir, &g)?;
    let out = gen.generate(a.count, a.walk_length, derive_seed(cli.seed, "generate", 0))?;
    export_walks(&out, g.num_vertices(), &cli.out_dir.join("generated.txt"))?;
    Ok(())
}

fn evaluate(cli: &Cli, a: &EvaluateCmd) -> Result<(), CliError> {
    let (split, _) = EdgeSplit::read_dir(&a.split)?;
    let n = split.train.num_vertices();
    let text = fs::read_to_string(&a.generated).map_err(|e| io_err(&a.generated, e))?;
    let generated = read_walks(&text, n)?;
    let mut report = evaluate_generated(
        &split,
        &generated,
        cli.assemble_mode,
        derive_seed(cli.seed, "evaluate", 0),
    )?;
    report.generator = format!("file:{}", file_name(&a.generated));
    write_json(&cli.out_dir.join("report.json"), &report)?;
    write_text(
        &cli.out_dir.join("scores.csv"),
        &assemble_scores(&generated, n)?.to_csv(),
    )?;
    log::info!(
        "roc_auc {:.4}, average precision {:.4}, edge overlap {:.4}",
        report.roc_auc,
        report.average_precision,
        report.edge_overlap
    );
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Serialize)]
pub struct EntropyRow {
    pub walk_length: usize,
    pub top_mean: f64,
    pub bottom_mean: f64,
    /// `top_mean - bottom_mean`; negative when dense starts are more
    /// predictable.
    pub difference: f64,
    pub top_std: f64,
    pub bottom_std: f64,
    /// Standard deviation of the per-repetition difference.
    pub difference_std: f64,
    pub fraction_top_lower: f64,
}

#[derive(Debug, Serialize)]
pub struct EntropyReport {
    pub walks: usize,
    pub repetitions: usize,
    pub top_vertices: Vec<usize>,
    pub bottom_vertices: Vec<usize>,
    pub rows: Vec<EntropyRow>,
}

fn entropy(cli: &Cli, a: &EntropyCmd) -> Result<(), CliError> {
    use densewalk::stats::Summary;
    let (g, _) = load_source(&a.source)?;
    let ranking = ranking_for(&g, &a.density, cli.seed, direction(cli))?;
    let mut rows = Vec::new();
    let mut vertices = (Vec::new(), Vec::new());
    for &l in &a.walk_lengths {
        let d = decile_entropy(
            &g,
            &ranking,
            l,
            a.walks,
            a.repetitions,
            derive_seed(cli.seed, "entropy", l as u64),
        )?;
        let (top, bottom) = (Summary::of(&d.top), Summary::of(&d.bottom));
        let diffs: Vec<f64> = d.top.iter().zip(&d.bottom).map(|(t, b)| t - b).collect();
        rows.push(EntropyRow {
            walk_length: l,
            top_mean: top.mean,
            bottom_mean: bottom.mean,
            difference: top.mean - bottom.mean,
            top_std: top.std,
            bottom_std: bottom.std,
            difference_std: Summary::of(&diffs).std,
            fraction_top_lower: d.fraction_top_lower(),
        });
        vertices = (d.top_vertices, d.bottom_vertices);
    }
    let report = EntropyReport {
        walks: a.walks,
        repetitions: a.repetitions,
        top_vertices: vertices.0,
        bottom_vertices: vertices.1,
        rows,
    };
    write_json(&cli.out_dir.join("entropy.json"), &report)
}
