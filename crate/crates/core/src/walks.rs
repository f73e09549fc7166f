//! Batches of short first-order random walks and their entropy.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{select_initializers, DensityRanking, RankDirection};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::proximity::{transition_matrix, TransitionMatrix};
use crate::rng;

/// How walk start vertices are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    UniformRandom,
    /// Uniform over the dense set from [`select_initializers`].
    DenseTopK {
        k: usize,
        random_mix_frac: f64,
    },
    /// Softmax over density scores divided by `temperature`.
    DensityWeighted {
        temperature: f64,
    },
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::UniformRandom => "uniform_random",
            Strategy::DenseTopK { .. } => "dense_top_k",
            Strategy::DensityWeighted { .. } => "density_weighted",
        }
    }
}

/// Training-walk configuration. `walk_length` counts steps, so each walk
/// visits `walk_length + 1` vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walk_length: usize,
    pub batch_size: usize,
    pub num_batches: usize,
    pub strategy: Strategy,
    pub seed: u64,
}

impl WalkConfig {
    pub fn total_walks(&self) -> usize {
        self.batch_size * self.num_batches
    }

    pub fn validate(&self) -> Result<()> {
        if self.walk_length == 0 {
            return Err(Error::param("walk_length", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        match self.strategy {
            Strategy::UniformRandom => {}
            Strategy::DenseTopK { k, random_mix_frac } => {
                if k == 0 {
                    return Err(Error::param("k", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&random_mix_frac) {
                    return Err(Error::param("random_mix_frac", "must lie in [0, 1]"));
                }
            }
            Strategy::DensityWeighted { temperature } => {
                if !(temperature > 0.0 && temperature.is_finite()) {
                    return Err(Error::param("temperature", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Equal-length walks stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSet {
    walk_length: usize,
    data: Vec<usize>,
    pub config: Option<WalkConfig>,
    pub seed: Option<u64>,
    pub graph_fingerprint: Option<u64>,
}

impl WalkSet {
    pub fn new(walk_length: usize) -> Self {
        WalkSet {
            walk_length,
            data: Vec::new(),
            config: None,
            seed: None,
            graph_fingerprint: None,
        }
    }

    /// Builds a set from explicit walks; all must have `walk_length + 1`
    /// vertices.
    pub fn from_walks(walk_length: usize, walks: &[Vec<usize>]) -> Result<Self> {
        let mut set = WalkSet::new(walk_length);
        for w in walks {
            set.push(w)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, walk: &[usize]) -> Result<()> {
        if walk.len() != self.walk_length + 1 {
            return Err(Error::param(
                "walk",
                format!("has {} vertices, expected {}", walk.len(), self.walk_length + 1),
            ));
        }
        self.data.extend_from_slice(walk);
        Ok(())
    }

    pub fn walk_length(&self) -> usize {
        self.walk_length
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.walk_length + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn walks(&self) -> std::slice::ChunksExact<'_, usize> {
        self.data.chunks_exact(self.walk_length + 1)
    }

    pub fn get(&self, i: usize) -> &[usize] {
        let stride = self.walk_length + 1;
        &self.data[i * stride..(i + 1) * stride]
    }

    pub fn max_vertex(&self) -> Option<usize> {
        self.data.iter().copied().max()
    }

    /// Appends every walk of `other`; lengths must agree.
    pub fn extend(&mut self, other: &WalkSet) -> Result<()> {
        if other.walk_length != self.walk_length && !other.is_empty() {
            return Err(Error::param("walk_length", "walk sets differ in length"));
        }
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    /// First step of some walk that is not an edge of `g`, as
    /// `(walk index, from, to)`.
    pub fn find_invalid_step(&self, g: &Graph) -> Option<(usize, usize, usize)> {
        self.walks().enumerate().find_map(|(i, w)| {
            w.windows(2)
                .find(|s| s[0] >= g.num_vertices() || !g.has_edge(s[0], s[1]))
                .map(|s| (i, s[0], s[1]))
        })
    }

    /// Text form: a `#walkset` header, then one walk per line.
    pub fn to_text(&self, num_vertices: usize) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        let mut out = format!("#walkset l={} n={num_vertices} seed={seed}\n", self.walk_length);
        for w in self.walks() {
            let mut first = true;
            for v in w {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Empirical Shannon entropy (natural log) of the distribution over distinct
/// walk sequences.
pub fn walk_entropy(walks: &WalkSet) -> Result<f64> {
    if walks.is_empty() {
        return Err(Error::param("walks", "entropy of an empty walk set"));
    }
    let mut counts: BTreeMap<&[usize], usize> = BTreeMap::new();
    for w in walks.walks() {
        *counts.entry(w).or_default() += 1;
    }
    let total = walks.len() as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        let p = c as f64 / total;
        h -= p * p.ln();
    }
    // -0.0 when all walks are identical
    Ok(h.max(0.0))
}

fn walk_from(p: &TransitionMatrix, start: usize, steps: usize, rng: &mut impl Rng, out: &mut Vec<usize>) {
    let mut at = start;
    out.push(at);
    for _ in 0..steps {
        at = p.step(at, rng).expect("start vertices have degree >= 1");
        out.push(at);
    }
}

/// `count` walks of `walk_length` steps, each starting at a uniformly chosen
/// element of `starts`. Walk `i` uses its own stream derived from `seed`.
pub fn sample_walks_from(g: &Graph, starts: &[usize], count: usize, walk_length: usize, seed: u64) -> Result<WalkSet> {
    let valid: Vec<usize> = starts
        .iter()
        .copied()
        .filter(|&v| v < g.num_vertices() && g.degree(v) > 0)
        .collect();
    if valid.is_empty() {
        return Err(Error::param("starts", "no start vertex has an incident edge"));
    }
    let weights = vec![1.0; valid.len()];
    sample_with_starts(g, &valid, &weights, count, walk_length, seed)
}

fn sample_with_starts(
    g: &Graph,
    starts: &[usize],
    weights: &[f64],
    count: usize,
    walk_length: usize,
    seed: u64,
) -> Result<WalkSet> {
    if walk_length == 0 {
        return Err(Error::param("walk_length", "must be at least 1"));
    }
    let p = transition_matrix(g);
    let uniform = weights.windows(2).all(|w| w[0] == w[1]);
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let stride = walk_length + 1;
    let data: Vec<usize> = (0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = rng::stream(seed, "walk", i as u64);
            let start = if uniform {
                starts[rng.random_range(0..starts.len())]
            } else {
                let x = rng.random::<f64>() * acc;
                let k = cumulative.partition_point(|&c| c <= x);
                starts[k.min(starts.len() - 1)]
            };
            let mut walk = Vec::with_capacity(stride);
            walk_from(&p, start, walk_length, &mut rng, &mut walk);
            walk
        })
        .collect();
    Ok(WalkSet {
        walk_length,
        data,
        config: None,
        seed: Some(seed),
        graph_fingerprint: Some(g.fingerprint()),
    })
}

/// Samples `batch_size * num_batches` walks with start vertices drawn per
/// `cfg.strategy`. Dense strategies need a ranking.
pub fn sample_walks(g: &Graph, cfg: &WalkConfig, ranking: Option<&DensityRanking>) -> Result<WalkSet> {
    cfg.validate()?;
    if g.num_edges() == 0 {
        return Err(Error::Edgeless);
    }
    let n = g.num_vertices();
    let need_ranking = || {
        ranking.ok_or_else(|| {
            Error::param(
                "ranking",
                format!("strategy {} requires a density ranking", cfg.strategy.label()),
            )
        })
    };
    let (starts, weights): (Vec<usize>, Vec<f64>) = match cfg.strategy {
        Strategy::UniformRandom => {
            // zero-degree vertices are never valid starts; dropping them is
            // the same as resampling until a valid start appears
            let starts: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
            let w = vec![1.0; starts.len()];
            (starts, w)
        }
        Strategy::DenseTopK { k, random_mix_frac } => {
            let ranking = need_ranking()?;
            check_ranking_size(ranking, n)?;
            let set = select_initializers(
                ranking,
                k.min(n),
                random_mix_frac,
                rng::derive_seed(cfg.seed, "initializers", 0),
            )?;
            let starts: Vec<usize> = set.into_iter().filter(|&v| g.degree(v) > 0).collect();
            let w = vec![1.0; starts.len()];
            (starts, w)
        }
        Strategy::DensityWeighted { temperature } => {
            let ranking = need_ranking()?;
            check_ranking_size(ranking, n)?;
            let sign = match ranking.params.direction {
                RankDirection::Descending => 1.0,
                RankDirection::Ascending => -1.0,
            };
            let starts: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
            let logits: Vec<f64> = starts.iter().map(|&v| sign * ranking.scores[v] / temperature).collect();
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w = logits.iter().map(|&x| (x - max).exp()).collect();
            (starts, w)
        }
    };
    if starts.is_empty() {
        return Err(Error::param("strategy", "no valid start vertex (all have degree 0)"));
    }
    let mut set = sample_with_starts(g, &starts, &weights, cfg.total_walks(), cfg.walk_length, cfg.seed)?;
    set.config = Some(cfg.clone());
    Ok(set)
}

fn check_ranking_size(ranking: &DensityRanking, n: usize) -> Result<()> {
    if ranking.n() != n {
        return Err(Error::param(
            "ranking",
            format!("covers {} vertices, graph has {n}", ranking.n()),
        ));
    }
    Ok(())
}

pub fn export_walks(w: &WalkSet, num_vertices: usize, path: &Path) -> Result<()> {
    fs::write(path, w.to_text(num_vertices)).map_err(|e| Error::io(path, e))
}

/// Parses walk text over vertex ids `< n` without checking adjacency.
pub fn read_walks(text: &str, n: usize) -> Result<WalkSet> {
    let mut header_len = None;
    let mut header_seed = None;
    let mut set: Option<WalkSet> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("#walkset") {
            for field in rest.split_whitespace() {
                if let Some(l) = field.strip_prefix("l=") {
                    header_len = l.parse::<usize>().ok();
                } else if let Some(s) = field.strip_prefix("seed=") {
                    header_seed = s.parse::<u64>().ok();
                }
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let walk = trimmed
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad vertex id `{t}`: {e}"),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        if let Some(&v) = walk.iter().find(|&&v| v >= n) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("vertex {v} out of range for {n} vertices"),
            });
        }
        if walk.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: "a walk needs at least two vertices".into(),
            });
        }
        let set = set.get_or_insert_with(|| WalkSet::new(walk.len() - 1));
        set.push(&walk).map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("walk has {} steps, expected {}", walk.len() - 1, set.walk_length()),
        })?;
    }
    let mut set = match (set, header_len) {
        (Some(s), Some(l)) if s.walk_length() != l => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header says l={l}, walks have {} steps", s.walk_length()),
            })
        }
        (Some(s), _) => s,
        (None, Some(l)) => WalkSet::new(l),
        (None, None) => {
            return Err(Error::Parse {
                line: 0,
                msg: "no walks and no header".into(),
            })
        }
    };
    set.seed = header_seed;
    Ok(set)
}

/// Reads a walk file and checks every step against the adjacency of `g`.
pub fn import_walks(path: &Path, g: &Graph) -> Result<WalkSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut set = read_walks(&text, g.num_vertices())?;
    if let Some((i, from, to)) = set.find_invalid_step(g) {
        // walk i sits on the (i+1)-th non-header line
        let line = text
            .lines()
            .enumerate()
            .filter(|(_, l)| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            })
            .nth(i)
            .map(|(idx, _)| idx + 1)
            .unwrap_or(0);
        return Err(Error::InvalidWalk { line, from, to });
    }
    set.graph_fingerprint = Some(g.fingerprint());
    Ok(set)
}

/// Entropy of walks started from the densest and sparsest deciles, repeated
/// over independent seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileEntropy {
    pub walk_length: usize,
    pub walks: usize,
    pub repetitions: usize,
    pub top_vertices: Vec<usize>,
    pub bottom_vertices: Vec<usize>,
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
}

impl DecileEntropy {
    /// Fraction of repetitions where the top decile's entropy is strictly
    /// lower.
    pub fn fraction_top_lower(&self) -> f64 {
        let wins = self.top.iter().zip(&self.bottom).filter(|(t, b)| t < b).count();
        wins as f64 / self.repetitions as f64
    }
}

/// Top and bottom deciles (`ceil(n/10)` vertices each) of the ranking,
/// ignoring isolated vertices.
pub fn ranking_deciles(ranking: &DensityRanking) -> (Vec<usize>, Vec<usize>) {
    let ranked: Vec<usize> = ranking
        .order
        .iter()
        .copied()
        .filter(|&v| !ranking.isolated[v])
        .collect();
    let size = ranked.len().div_ceil(10).max(1).min(ranked.len());
    let top = ranked[..size].to_vec();
    let bottom = ranked[ranked.len() - size..].to_vec();
    (top, bottom)
}

pub fn decile_entropy(
    g: &Graph,
    ranking: &DensityRanking,
    walk_length: usize,
    walks: usize,
    repetitions: usize,
    seed: u64,
) -> Result<DecileEntropy> {
    if repetitions == 0 || walks == 0 {
        return Err(Error::param("repetitions", "walks and repetitions must be positive"));
    }
    let (top_vertices, bottom_vertices) = ranking_deciles(ranking);
    let mut top = Vec::with_capacity(repetitions);
    let mut bottom = Vec::with_capacity(repetitions);
    for r in 0..repetitions as u64 {
        let t = sample_walks_from(
            g,
            &top_vertices,
            walks,
            walk_length,
            rng::derive_seed(seed, "entropy-top", r),
        )?;
        let b = sample_walks_from(
            g,
            &bottom_vertices,
            walks,
            walk_length,
            rng::derive_seed(seed, "entropy-bottom", r),
        )?;
        top.push(walk_entropy(&t)?);
        bottom.push(walk_entropy(&b)?);
    }
    Ok(DecileEntropy {
        walk_length,
        walks,
        repetitions,
        top_vertices,
        bottom_vertices,
        top,
        bottom,
    })
}
