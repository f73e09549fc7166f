//! The uniform vs dense grid: one pipeline run per (config, strategy) cell.

use std::fmt::Write as _;
use std::path::Path;

use densewalk::density::RankDirection;
use densewalk::pipeline::{evaluate_pipeline, PipelineResult};
use densewalk::rng::derive_seed;
use densewalk::split::{split_edges, EdgeSplit, DEFAULT_TEST_FRAC, DEFAULT_VAL_FRAC};
use densewalk::stats::Summary;
use densewalk::{GeneratorSpec, PipelineOptions, WalkConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BenchmarkCmd, Cli, GeneratorKind, GridConfig, StrategyKind};
use crate::commands::{load_component, param, ranking_for, strategy, write_json, write_text};
use crate::CliError;

struct Cell {
    config_idx: usize,
    config: GridConfig,
    strategy: StrategyKind,
}

impl Cell {
    fn label(&self) -> String {
        format!(
            "{}-b{}-l{}",
            strategy_name(self.strategy),
            self.config.batch_size,
            self.config.walk_length
        )
    }
}

fn strategy_name(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::Uniform => "uniform",
        StrategyKind::Dense => "dense",
        StrategyKind::Weighted => "weighted",
    }
}

fn column_name(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::Uniform => "Random",
        StrategyKind::Dense => "Dense",
        StrategyKind::Weighted => "Weighted",
    }
}

#[derive(Serialize)]
struct CellReport<'a> {
    strategy: &'static str,
    batch_size: usize,
    walk_length: usize,
    seed: u64,
    #[serde(flatten)]
    result: &'a PipelineResult,
}

fn load_split(cli: &Cli, a: &BenchmarkCmd) -> Result<EdgeSplit, CliError> {
    match (&a.source.split, &a.source.input) {
        (Some(dir), _) => Ok(EdgeSplit::read_dir(dir)?.0),
        (None, Some(input)) => {
            let (g, _) = load_component(input, false)?;
            Ok(split_edges(
                &g,
                DEFAULT_VAL_FRAC,
                DEFAULT_TEST_FRAC,
                derive_seed(cli.seed, "split", 0),
            )?)
        }
        (None, None) => Err(CliError::Usage("one of --split or --input is required".into())),
    }
}

pub fn run(cli: &Cli, a: &BenchmarkCmd) -> Result<(), CliError> {
    if a.configs.is_empty() || a.strategies.is_empty() {
        return Err(param("configs", "configs and strategies must be non-empty").into());
    }
    let split = load_split(cli, a)?;
    let n = split.train.num_vertices();
    let direction = if cli.invert_ranking {
        RankDirection::Ascending
    } else {
        RankDirection::Descending
    };
    let needs_ranking = a.strategies.iter().any(|&s| s != StrategyKind::Uniform);
    let ranking = if needs_ranking {
        Some(ranking_for(&split.train, &a.density, cli.seed, direction)?)
    } else {
        None
    };
    let generator = match a.generator {
        GeneratorKind::Markov => GeneratorSpec::Markov { alpha: a.alpha },
        GeneratorKind::Replay => GeneratorSpec::Replay,
    };

    let cells: Vec<Cell> = a
        .configs
        .iter()
        .enumerate()
        .flat_map(|(config_idx, &config)| {
            a.strategies.iter().map(move |&strategy| Cell {
                config_idx,
                config,
                strategy,
            })
        })
        .collect();

    // strategies in one config share a seed, so their runs are paired
    let results: Vec<(u64, PipelineResult)> = cells
        .par_iter()
        .map(|cell| {
            let seed = derive_seed(cli.seed, "benchmark", cell.config_idx as u64);
            let cfg = WalkConfig {
                walk_length: cell.config.walk_length,
                batch_size: cell.config.batch_size,
                num_batches: a.num_batches,
                strategy: strategy(cell.strategy, a.k, a.random_mix_frac, a.temperature, n),
                seed,
            };
            let opts = PipelineOptions {
                repetitions: a.repetitions,
                seed,
                generation_multiplier: a.generation_multiplier,
                assemble_mode: cli.assemble_mode,
                share_seed: false,
            };
            let ranking = (cell.strategy != StrategyKind::Uniform)
                .then_some(ranking.as_ref())
                .flatten();
            evaluate_pipeline(&split, &cfg, ranking, &generator, &opts)
                .map(|r| (seed, r))
                .map_err(|e| e.in_stage("benchmark", cell.label()))
        })
        .collect::<Result<_, _>>()?;

    let runs = cli.out_dir.join("runs");
    for (cell, (seed, result)) in cells.iter().zip(&results) {
        let report = CellReport {
            strategy: strategy_name(cell.strategy),
            batch_size: cell.config.batch_size,
            walk_length: cell.config.walk_length,
            seed: *seed,
            result,
        };
        write_json(&runs.join(format!("{}.json", cell.label())), &report)?;
    }
    let summaries: Vec<_> = cells.iter().zip(results.iter().map(|(_, r)| r)).collect();
    write_text(&cli.out_dir.join("aggregate.csv"), &aggregate_csv(&summaries))?;
    write_text(&cli.out_dir.join("summary.md"), &summary_markdown(a, &summaries))?;
    log::info!("benchmark: {} cells written to {}", cells.len(), display(&cli.out_dir));
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn aggregate_csv(cells: &[(&Cell, &PipelineResult)]) -> String {
    let mut out = String::from("strategy,batch_size,walk_length,metric,mean,std,min,max,n_reps\n");
    for (cell, result) in cells {
        for (metric, s) in result.aggregate.metrics() {
            let _ = writeln!(
                out,
                "{},{},{},{metric},{},{},{},{},{}",
                strategy_name(cell.strategy),
                cell.config.batch_size,
                cell.config.walk_length,
                s.mean,
                s.std,
                s.min,
                s.max,
                s.n
            );
        }
    }
    out
}

fn pm(s: &Summary) -> String {
    format!("{:.3} ± {:.3}", s.mean, s.std)
}

fn find<'a>(cells: &'a [(&Cell, &PipelineResult)], config: GridConfig, s: StrategyKind) -> Option<&'a PipelineResult> {
    cells
        .iter()
        .find(|(c, _)| c.config == config && c.strategy == s)
        .map(|(_, r)| *r)
}

fn summary_markdown(a: &BenchmarkCmd, cells: &[(&Cell, &PipelineResult)]) -> String {
    let strategies = &a.strategies;
    let joined = |f: &dyn Fn(StrategyKind) -> String| strategies.iter().map(|&s| f(s)).collect::<Vec<_>>().join(" / ");
    let names = joined(&|s| column_name(s).to_string());

    let mut out = String::from("# Benchmark summary\n\n");
    let _ = writeln!(
        out,
        "{} repetitions per cell. Entries are mean ± std across repetitions, listed as {names}.\n",
        a.repetitions
    );
    let _ = writeln!(
        out,
        "| Batch size | Random walk length | Average training accuracy | Average precision ({names}) | Average ROC-AUC ({names}) | Edge overlap ({names}) |"
    );
    out.push_str("|---|---|---|---|---|---|\n");
    for config in &a.configs {
        let cell = |s: StrategyKind, pick: fn(&PipelineResult) -> Summary| {
            find(cells, *config, s)
                .map(|r| pm(&pick(r)))
                .unwrap_or_else(|| "-".into())
        };
        let _ = writeln!(
            out,
            "| {} | {} | n/a | {} | {} | {} |",
            config.batch_size,
            config.walk_length,
            joined(&|s| cell(s, |r| r.aggregate.average_precision)),
            joined(&|s| cell(s, |r| r.aggregate.roc_auc)),
            joined(&|s| cell(s, |r| r.aggregate.edge_overlap)),
        );
    }
    out.push_str("\nTraining accuracy belongs to an adversarial discriminator; the surrogate generators have none.\n");

    if strategies.contains(&StrategyKind::Uniform) && strategies.contains(&StrategyKind::Dense) {
        out.push_str("\n## Dense vs random\n\n");
        out.push_str("| Batch size | Random walk length | Metric | Higher mean | Lower std |\n");
        out.push_str("|---|---|---|---|---|\n");
        for config in &a.configs {
            let (Some(u), Some(d)) = (
                find(cells, *config, StrategyKind::Uniform),
                find(cells, *config, StrategyKind::Dense),
            ) else {
                continue;
            };
            for ((label, us), (_, ds)) in u.aggregate.metrics().iter().zip(d.aggregate.metrics().iter()) {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    config.batch_size,
                    config.walk_length,
                    metric_label(label),
                    compare(ds.mean, us.mean),
                    compare(us.std, ds.std),
                );
            }
        }
    }
    out
}

fn metric_label(name: &str) -> &'static str {
    match name {
        "average_precision" => "Average precision",
        "roc_auc" => "Average ROC-AUC",
        _ => "Edge overlap",
    }
}

/// "Dense" when `dense_side > random_side`, "Random" when lower, "tie"
/// otherwise.
fn compare(dense_side: f64, random_side: f64) -> &'static str {
    if dense_side > random_side {
        "Dense"
    } else if dense_side < random_side {
        "Random"
    } else {
        "tie"
    }
}
