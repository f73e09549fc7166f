//! End-to-end link-prediction evaluation of a walk-initializer strategy.
//!
//! One repetition samples training walks from the training graph, fits a
//! generator, generates walks, assembles the score matrix and scores it
//! against the held-out test edges and nonedges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityRanking;
use crate::error::{Error, Result};
use crate::generator::{
    assemble_graph, assemble_scores, AssembleMode, MarkovGenerator, ReplayGenerator, WalkGenerator, DEFAULT_ALPHA,
};
use crate::metrics::{average_precision, edge_overlap, roc_auc};
use crate::rng;
use crate::split::EdgeSplit;
use crate::stats::Summary;
use crate::walks::{sample_walks, WalkConfig, WalkSet};

pub const DEFAULT_GENERATION_MULTIPLIER: usize = 10;

/// Builds fresh, unfitted generators for each repetition.
pub trait GeneratorFactory: Sync {
    fn id(&self) -> String;
    fn build(&self) -> Box<dyn WalkGenerator>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Markov { alpha: f64 },
    Replay,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec::Markov { alpha: DEFAULT_ALPHA }
    }
}

impl GeneratorFactory for GeneratorSpec {
    fn id(&self) -> String {
        match self {
            GeneratorSpec::Markov { alpha } => format!("markov(alpha={alpha})"),
            GeneratorSpec::Replay => "replay".into(),
        }
    }

    fn build(&self) -> Box<dyn WalkGenerator> {
        match *self {
            GeneratorSpec::Markov { alpha } => {
                Box::new(MarkovGenerator::new(alpha).expect("alpha validated by caller"))
            }
            GeneratorSpec::Replay => Box::new(ReplayGenerator::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub repetitions: usize,
    pub seed: u64,
    /// Generated walks per training walk.
    pub generation_multiplier: usize,
    pub assemble_mode: AssembleMode,
    /// Give every repetition the same seed instead of deriving one each.
    pub share_seed: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            repetitions: 10,
            seed: 0,
            generation_multiplier: DEFAULT_GENERATION_MULTIPLIER,
            assemble_mode: AssembleMode::TopK,
            share_seed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub roc_auc: f64,
    pub average_precision: f64,
    pub edge_overlap: f64,
    /// A discriminator quantity with no counterpart in the surrogate
    /// generators; always `None`.
    pub training_accuracy: Option<f64>,
    pub config: Option<WalkConfig>,
    pub generator: String,
    pub split_seed: u64,
    pub run_seed: u64,
    pub repetition: usize,
    pub train_walks: usize,
    pub generated_walks: usize,
    pub assembly_shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub roc_auc: Summary,
    pub average_precision: Summary,
    pub edge_overlap: Summary,
}

impl Aggregate {
    pub fn of(reports: &[EvalReport]) -> Aggregate {
        let pick = |f: fn(&EvalReport) -> f64| Summary::of(&reports.iter().map(f).collect::<Vec<_>>());
        Aggregate {
            roc_auc: pick(|r| r.roc_auc),
            average_precision: pick(|r| r.average_precision),
            edge_overlap: pick(|r| r.edge_overlap),
        }
    }

    /// `(metric name, summary)` in a fixed order.
    pub fn metrics(&self) -> [(&'static str, Summary); 3] {
        [
            ("average_precision", self.average_precision),
            ("roc_auc", self.roc_auc),
            ("edge_overlap", self.edge_overlap),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub reports: Vec<EvalReport>,
    pub aggregate: Aggregate,
}

/// Fits `generator` on `train_walks`, generates `generated_count` walks and
/// scores them against the split.
pub fn evaluate_walks(
    split: &EdgeSplit,
    train_walks: &WalkSet,
    generator: &mut dyn WalkGenerator,
    generated_count: usize,
    assemble_mode: AssembleMode,
    seed: u64,
) -> Result<EvalReport> {
    generator
        .fit(train_walks, &split.train)
        .map_err(|e| e.in_stage("fit", generator.id()))?;
    let generated = generator
        .generate(
            generated_count,
            train_walks.walk_length(),
            rng::derive_seed(seed, "generate", 0),
        )
        .map_err(|e| e.in_stage("generate", generator.id()))?;
    evaluate_generated(split, &generated, assemble_mode, seed).map(|mut r| {
        r.generator = generator.id();
        r.train_walks = train_walks.len();
        r
    })
}

/// Scores an already generated walk set against the split.
pub fn evaluate_generated(
    split: &EdgeSplit,
    generated: &WalkSet,
    assemble_mode: AssembleMode,
    seed: u64,
) -> Result<EvalReport> {
    let n = split.train.num_vertices();
    let scores = assemble_scores(generated, n).map_err(|e| e.in_stage("assemble_scores", ""))?;
    let roc = roc_auc(&scores, &split.test_edges, &split.test_nonedges).map_err(|e| e.in_stage("roc_auc", ""))?;
    let ap = average_precision(&scores, &split.test_edges, &split.test_nonedges)
        .map_err(|e| e.in_stage("average_precision", ""))?;
    let assembled = assemble_graph(
        &scores,
        split.train.num_edges(),
        assemble_mode,
        rng::derive_seed(seed, "assemble", 0),
    )
    .map_err(|e| e.in_stage("assemble_graph", ""))?;
    let overlap = edge_overlap(&assembled.graph, &split.train).map_err(|e| e.in_stage("edge_overlap", ""))?;
    let report = EvalReport {
        roc_auc: roc,
        average_precision: ap,
        edge_overlap: overlap,
        training_accuracy: None,
        config: None,
        generator: String::new(),
        split_seed: split.seed,
        run_seed: seed,
        repetition: 0,
        train_walks: 0,
        generated_walks: generated.len(),
        assembly_shortfall: assembled.shortfall,
    };
    for (name, v) in [("roc_auc", roc), ("average_precision", ap), ("edge_overlap", overlap)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Invariant(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(report)
}

/// Runs the full pipeline `opts.repetitions` times and aggregates.
///
/// Repetitions run in parallel; each derives its seed from `opts.seed` and
/// its index, so the output does not depend on scheduling.
pub fn evaluate_pipeline(
    split: &EdgeSplit,
    cfg: &WalkConfig,
    ranking: Option<&DensityRanking>,
    generator: &dyn GeneratorFactory,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    if opts.repetitions == 0 {
        return Err(Error::param("repetitions", "must be at least 1"));
    }
    let reports = (0..opts.repetitions)
        .into_par_iter()
        .map(|r| {
            let run_seed = if opts.share_seed {
                opts.seed
            } else {
                rng::derive_seed(opts.seed, "repetition", r as u64)
            };
            let rep_cfg = WalkConfig {
                seed: rng::derive_seed(run_seed, "train-walks", 0),
                ..cfg.clone()
            };
            let train_walks = sample_walks(&split.train, &rep_cfg, ranking)
                .map_err(|e| e.in_stage("sample_walks", format!("repetition {r}")))?;
            let mut gen = generator.build();
            let count = train_walks.len() * opts.generation_multiplier;
            let mut report = evaluate_walks(split, &train_walks, gen.as_mut(), count, opts.assemble_mode, run_seed)?;
            report.repetition = r;
            report.config = Some(cfg.clone());
            report.generator = generator.id();
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = Aggregate::of(&reports);
    Ok(PipelineResult { reports, aggregate })
}
