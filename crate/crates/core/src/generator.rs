//! Walk generators standing in for a learned generative model, and the
//! transition-count score matrix assembled from generated walks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::walks::WalkSet;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// A model that is fitted on training walks and then emits new walks.
///
/// Generated walks may step between non-adjacent vertices; proposing unseen
/// edges is what link prediction scores.
pub trait WalkGenerator: Send + Sync {
    fn id(&self) -> String;

    fn fit(&mut self, train: &WalkSet, g: &Graph) -> Result<()>;

    /// `count` walks of `walk_length` steps, deterministic in `seed`.
    fn generate(&self, count: usize, walk_length: usize, seed: u64) -> Result<WalkSet>;
}

/// Sparse probability row with running sums for sampling.
#[derive(Debug, Clone, PartialEq)]
struct SampleRow {
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl SampleRow {
    fn from_weights(entries: &[(usize, f64)]) -> Self {
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for &(_, w) in entries {
            acc += w;
            cumulative.push(acc);
        }
        SampleRow {
            targets: entries.iter().map(|&(v, _)| v).collect(),
            cumulative,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let total = *self.cumulative.last()?;
        let x = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= x);
        Some(self.targets[k.min(self.targets.len() - 1)])
    }
}

#[derive(Debug, Clone, PartialEq)]
struct MarkovFit {
    start_counts: BTreeMap<usize, f64>,
    transitions: Vec<BTreeMap<usize, f64>>,
    neighbors: Vec<Vec<usize>>,
    starts: SampleRow,
    rows: Vec<SampleRow>,
}

/// First-order Markov chain over vertices with additive smoothing.
///
/// Row `u` is normalized over the observed successors of `u` together with
/// the graph neighbors of `u`; every entry of that support gets `alpha`
/// added. With `alpha = 0` a row never observed in training falls back to
/// uniform over graph neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGenerator {
    pub alpha: f64,
    fit: Option<MarkovFit>,
}

impl MarkovGenerator {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("{alpha} must be >= 0")));
        }
        Ok(MarkovGenerator { alpha, fit: None })
    }

    fn fitted(&self) -> Result<&MarkovFit> {
        self.fit.as_ref().ok_or(Error::NotFitted)
    }

    /// Start distribution as `(vertex, probability)` pairs.
    pub fn start_distribution(&self) -> Result<Vec<(usize, f64)>> {
        let fit = self.fitted()?;
        let total: f64 = fit.start_counts.values().sum();
        Ok(fit.start_counts.iter().map(|(&v, &c)| (v, c / total)).collect())
    }

    pub fn transition_count(&self, u: usize, v: usize) -> Result<f64> {
        let fit = self.fitted()?;
        Ok(fit.transitions.get(u).and_then(|r| r.get(&v)).copied().unwrap_or(0.0))
    }

    /// Smoothed, normalized transition row of `u`.
    pub fn transition_row(&self, u: usize) -> Result<Vec<(usize, f64)>> {
        let fit = self.fitted()?;
        let row = &fit.rows[u];
        let total = row.cumulative.last().copied().unwrap_or(0.0);
        let mut prev = 0.0;
        Ok(row
            .targets
            .iter()
            .zip(&row.cumulative)
            .map(|(&v, &c)| {
                let p = (c - prev) / total;
                prev = c;
                (v, p)
            })
            .collect())
    }

    fn build(
        alpha: f64,
        start_counts: BTreeMap<usize, f64>,
        transitions: Vec<BTreeMap<usize, f64>>,
        neighbors: Vec<Vec<usize>>,
    ) -> MarkovFit {
        let start_entries: Vec<(usize, f64)> = start_counts.iter().map(|(&v, &c)| (v, c)).collect();
        let rows = transitions
            .iter()
            .zip(&neighbors)
            .map(|(observed, nbrs)| {
                let mut support: BTreeMap<usize, f64> = observed.clone();
                for &v in nbrs {
                    support.entry(v).or_insert(0.0);
                }
                let mut entries: Vec<(usize, f64)> = support.into_iter().map(|(v, c)| (v, c + alpha)).collect();
                if entries.iter().all(|&(_, w)| w == 0.0) {
                    // alpha = 0 and nothing observed: uniform over neighbors
                    entries = nbrs.iter().map(|&v| (v, 1.0)).collect();
                }
                SampleRow::from_weights(&entries)
            })
            .collect();
        MarkovFit {
            starts: SampleRow::from_weights(&start_entries),
            start_counts,
            transitions,
            neighbors,
            rows,
        }
    }

    /// Writes `generator.json` and `transitions.txt` (`u v count`) into
    /// `dir`. Graph neighbors are not stored; [`MarkovGenerator::load`]
    /// takes the graph again.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let fit = self.fitted()?;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let bundle = GeneratorBundle {
            kind: "markov".into(),
            alpha: Some(self.alpha),
            num_vertices: fit.transitions.len(),
            start_counts: fit.start_counts.iter().map(|(&v, &c)| (v, c)).collect(),
        };
        let path = dir.join("generator.json");
        fs::write(&path, serde_json::to_string_pretty(&bundle)? + "\n").map_err(|e| Error::io(&path, e))?;
        let mut text = String::new();
        for (u, row) in fit.transitions.iter().enumerate() {
            for (v, c) in row {
                let _ = writeln!(text, "{u} {v} {c}");
            }
        }
        let path = dir.join("transitions.txt");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path, g: &Graph) -> Result<Self> {
        let path = dir.join("generator.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let bundle: GeneratorBundle = serde_json::from_str(&text)?;
        if bundle.kind != "markov" {
            return Err(Error::param(
                "generator",
                format!("bundle kind `{}` is not markov", bundle.kind),
            ));
        }
        let n = g.num_vertices();
        if bundle.num_vertices != n {
            return Err(Error::param(
                "generator",
                format!("bundle has {} vertices, graph has {n}", bundle.num_vertices),
            ));
        }
        let mut transitions = vec![BTreeMap::new(); n];
        for (u, v, c) in crate::graph::read_pairs(&dir.join("transitions.txt"), n)? {
            transitions[u].insert(v, c);
        }
        let neighbors = (0..n)
            .map(|u| g.neighbors(u).iter().map(|&(v, _)| v).collect())
            .collect();
        let alpha = bundle.alpha.unwrap_or(DEFAULT_ALPHA);
        let start_counts = bundle.start_counts.into_iter().collect();
        Ok(MarkovGenerator {
            alpha,
            fit: Some(Self::build(alpha, start_counts, transitions, neighbors)),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GeneratorBundle {
    kind: String,
    alpha: Option<f64>,
    num_vertices: usize,
    start_counts: Vec<(usize, f64)>,
}

/// Counts starts and steps of `train`; see [`MarkovGenerator`] for the
/// smoothing rule.
pub fn fit_markov(train: &WalkSet, g: &Graph, alpha: f64) -> Result<MarkovGenerator> {
    let mut gen = MarkovGenerator::new(alpha)?;
    gen.fit(train, g)?;
    Ok(gen)
}

impl WalkGenerator for MarkovGenerator {
    fn id(&self) -> String {
        format!("markov(alpha={})", self.alpha)
    }

    fn fit(&mut self, train: &WalkSet, g: &Graph) -> Result<()> {
        if train.is_empty() {
            return Err(Error::param("train", "cannot fit on an empty walk set"));
        }
        let n = g.num_vertices();
        if let Some(v) = train.max_vertex().filter(|&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        let mut start_counts = BTreeMap::new();
        let mut transitions = vec![BTreeMap::new(); n];
        for w in train.walks() {
            *start_counts.entry(w[0]).or_insert(0.0) += 1.0;
            for s in w.windows(2) {
                *transitions[s[0]].entry(s[1]).or_insert(0.0) += 1.0;
            }
        }
        let neighbors = (0..n)
            .map(|u| g.neighbors(u).iter().map(|&(v, _)| v).collect())
            .collect();
        self.fit = Some(Self::build(self.alpha, start_counts, transitions, neighbors));
        Ok(())
    }

    fn generate(&self, count: usize, walk_length: usize, seed: u64) -> Result<WalkSet> {
        let fit = self.fitted()?;
        let stride = walk_length + 1;
        let data: Vec<usize> = (0..count)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut rng = rng::stream(seed, "generate", i as u64);
                let mut at = fit.starts.sample(&mut rng).expect("fitted start distribution");
                let mut walk = Vec::with_capacity(stride);
                walk.push(at);
                for _ in 0..walk_length {
                    // an empty support only happens for isolated vertices; the
                    // walk then stays put and the self-step is discarded at
                    // assembly
                    at = fit.rows[at].sample(&mut rng).unwrap_or(at);
                    walk.push(at);
                }
                walk
            })
            .collect();
        let mut out = WalkSet::new(walk_length);
        for w in data.chunks_exact(stride) {
            out.push(w)?;
        }
        out.seed = Some(seed);
        Ok(out)
    }
}

/// Resamples the training walks themselves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayGenerator {
    train: Option<WalkSet>,
}

impl ReplayGenerator {
    pub fn new() -> Self {
        ReplayGenerator { train: None }
    }
}

/// A replay generator already fitted on `train`.
pub fn replay_generator(train: &WalkSet) -> Result<ReplayGenerator> {
    if train.is_empty() {
        return Err(Error::param("train", "cannot replay an empty walk set"));
    }
    Ok(ReplayGenerator {
        train: Some(train.clone()),
    })
}

impl WalkGenerator for ReplayGenerator {
    fn id(&self) -> String {
        "replay".into()
    }

    fn fit(&mut self, train: &WalkSet, _g: &Graph) -> Result<()> {
        *self = replay_generator(train)?;
        Ok(())
    }

    /// With `count == |train|` the output is a seeded shuffle of the training
    /// multiset; otherwise walks are drawn uniformly with replacement.
    fn generate(&self, count: usize, walk_length: usize, seed: u64) -> Result<WalkSet> {
        let train = self.train.as_ref().ok_or(Error::NotFitted)?;
        let mut out = WalkSet::new(walk_length);
        out.seed = Some(seed);
        if count == 0 {
            return Ok(out);
        }
        if walk_length != train.walk_length() {
            return Err(Error::param(
                "walk_length",
                format!("replay can only emit length {}", train.walk_length()),
            ));
        }
        let mut rng = rng::stream(seed, "replay", 0);
        let picks: Vec<usize> = if count == train.len() {
            let mut all: Vec<usize> = (0..count).collect();
            all.shuffle(&mut rng);
            all
        } else {
            (0..count).map(|_| rng.random_range(0..train.len())).collect()
        };
        for i in picks {
            out.push(train.get(i))?;
        }
        Ok(out)
    }
}

/// Symmetric transition counts over unordered vertex pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMatrix {
    pub n: usize,
    counts: BTreeMap<(usize, usize), u64>,
    /// Steps that were counted (self-steps excluded).
    pub total_transitions: u64,
    /// Self-steps dropped from the matrix.
    pub discarded_self_steps: u64,
}

impl ScoreMatrix {
    pub fn new(n: usize) -> Self {
        ScoreMatrix {
            n,
            ..Default::default()
        }
    }

    pub fn count(&self, u: usize, v: usize) -> u64 {
        if u == v {
            return 0;
        }
        self.counts.get(&(u.min(v), u.max(v))).copied().unwrap_or(0)
    }

    /// Score of a pair; pairs never traversed score 0.
    pub fn score(&self, u: usize, v: usize) -> f64 {
        self.count(u, v) as f64
    }

    /// Nonzero pairs `(u, v, count)` with `u < v`, ascending.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().map(|(&(u, v), &c)| (u, v, c))
    }

    pub fn nnz(&self) -> usize {
        self.counts.len()
    }

    /// Adds another matrix of the same size entry-wise.
    pub fn merge(&mut self, other: &ScoreMatrix) -> Result<()> {
        if other.n != self.n {
            return Err(Error::param("scores", "matrices differ in size"));
        }
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.total_transitions += other.total_transitions;
        self.discarded_self_steps += other.discarded_self_steps;
        Ok(())
    }

    /// `u,v,count` CSV with a header, `u < v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,count\n");
        for (u, v, c) in self.entries() {
            let _ = writeln!(out, "{u},{v},{c}");
        }
        out
    }
}

/// Counts every consecutive pair of every walk, symmetrically.
pub fn assemble_scores(generated: &WalkSet, n: usize) -> Result<ScoreMatrix> {
    if let Some(v) = generated.max_vertex().filter(|&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    let mut scores = ScoreMatrix::new(n);
    for w in generated.walks() {
        for s in w.windows(2) {
            let (u, v) = (s[0], s[1]);
            if u == v {
                scores.discarded_self_steps += 1;
                continue;
            }
            *scores.counts.entry((u.min(v), u.max(v))).or_default() += 1;
            scores.total_transitions += 1;
        }
    }
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssembleMode {
    #[default]
    TopK,
    Sample,
}

impl std::str::FromStr for AssembleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "top_k" | "topk" | "top-k" => Ok(AssembleMode::TopK),
            "sample" => Ok(AssembleMode::Sample),
            other => Err(format!("unknown assemble mode `{other}` (top_k | sample)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledGraph {
    pub graph: Graph,
    /// Requested edges that could not be placed.
    pub shortfall: usize,
}

/// Picks `target_edges` pairs from the score matrix: the highest counts
/// (ties by ascending pair) or a count-weighted sample without replacement.
pub fn assemble_graph(
    scores: &ScoreMatrix,
    target_edges: usize,
    mode: AssembleMode,
    seed: u64,
) -> Result<AssembledGraph> {
    let entries: Vec<(usize, usize, u64)> = scores.entries().collect();
    let take = target_edges.min(entries.len());
    let shortfall = target_edges - take;
    let chosen: Vec<(usize, usize)> = match mode {
        AssembleMode::TopK => {
            let mut sorted = entries.clone();
            sorted.sort_by(|a, b| b.2.cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
            sorted[..take].iter().map(|&(u, v, _)| (u, v)).collect()
        }
        AssembleMode::Sample => {
            if take == 0 {
                Vec::new()
            } else {
                let mut rng = rng::stream(seed, "assemble", 0);
                let picked = index::sample_weighted(&mut rng, entries.len(), |i| entries[i].2 as f64, take)
                    .map_err(|e| Error::Invariant(format!("weighted sampling failed: {e}")))?;
                let mut pairs: Vec<(usize, usize)> = picked.iter().map(|i| (entries[i].0, entries[i].1)).collect();
                pairs.sort_unstable();
                pairs
            }
        }
    };
    Ok(AssembledGraph {
        graph: Graph::from_pairs(scores.n, &chosen)?,
        shortfall,
    })
}
