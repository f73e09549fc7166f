//! Influence, per-vertex density scores and walk-initializer selection.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proximity::{Origin, ProximityMatrix};
use crate::rng;

pub const DEFAULT_SIGMA: f64 = 1.0;

/// Saturating influence `1 - exp(-d / (2 sigma^2))`. Mathematically below 1,
/// it rounds to exactly 1.0 once `d / sigma^2` passes about 75.
pub fn influence(d: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    if d.is_nan() || d < 0.0 {
        return Err(Error::param("d", format!("{d} must be nonnegative")));
    }
    Ok(-(-d / (2.0 * sigma * sigma)).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma {
    Fixed(f64),
    /// Mean of the positive off-diagonal proximity entries.
    Auto,
}

impl Default for Sigma {
    fn default() -> Self {
        Sigma::Fixed(DEFAULT_SIGMA)
    }
}

impl std::str::FromStr for Sigma {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Sigma::Auto);
        }
        s.parse::<f64>()
            .map(Sigma::Fixed)
            .map_err(|e| format!("sigma must be a number or `auto`: {e}"))
    }
}

/// Which end of the score scale counts as densest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankDirection {
    /// Highest aggregate influence first.
    #[default]
    Descending,
    /// Lowest aggregate influence first (`--invert-ranking`).
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingParams {
    pub horizon: usize,
    pub restart: f64,
    pub sigma: f64,
    pub origin: Origin,
    pub direction: RankDirection,
}

/// Per-vertex density scores with a total order, densest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRanking {
    pub scores: Vec<f64>,
    /// Vertex ids, densest first.
    pub order: Vec<usize>,
    /// Vertices with no off-diagonal proximity (isolated at this horizon).
    pub isolated: Vec<bool>,
    pub params: RankingParams,
}

fn auto_sigma(r: &ProximityMatrix) -> f64 {
    let (sum, count) = (0..r.n())
        .flat_map(|i| r.row(i).iter().filter(move |&&(j, v)| j != i && v > 0.0))
        .fold((0.0, 0usize), |(s, c), &(_, v)| (s + v, c + 1));
    if count == 0 {
        DEFAULT_SIGMA
    } else {
        sum / count as f64
    }
}

/// Density of every vertex: the summed influence of its proximity to every
/// other vertex. The diagonal self-term is excluded.
pub fn density_scores(r: &ProximityMatrix, sigma: Sigma, direction: RankDirection) -> Result<DensityRanking> {
    let sigma = match sigma {
        Sigma::Fixed(s) => s,
        Sigma::Auto => auto_sigma(r),
    };
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    let n = r.n();
    let mut scores = Vec::with_capacity(n);
    let mut isolated = Vec::with_capacity(n);
    for i in 0..n {
        let mut score = 0.0;
        let mut reach = false;
        for &(j, d) in r.row(i) {
            if j != i && d > 0.0 {
                score += influence(d, sigma)?;
                reach = true;
            }
        }
        scores.push(score);
        isolated.push(!reach);
    }
    let order = rank_order(&scores, &isolated, direction);
    Ok(DensityRanking {
        scores,
        order,
        isolated,
        params: RankingParams {
            horizon: r.horizon,
            restart: r.restart,
            sigma,
            origin: r.origin,
            direction,
        },
    })
}

/// Sort by score in `direction`, ties by ascending id, isolated vertices
/// last regardless of direction.
fn rank_order(scores: &[f64], isolated: &[bool], direction: RankDirection) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        isolated[a]
            .cmp(&isolated[b])
            .then_with(|| match direction {
                RankDirection::Descending => scores[b].total_cmp(&scores[a]),
                RankDirection::Ascending => scores[a].total_cmp(&scores[b]),
            })
            .then(a.cmp(&b))
    });
    order
}

impl DensityRanking {
    pub fn n(&self) -> usize {
        self.scores.len()
    }

    /// 1-based rank of every vertex.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.n()];
        for (pos, &v) in self.order.iter().enumerate() {
            ranks[v] = pos + 1;
        }
        ranks
    }

    /// Copy re-sorted in the other direction.
    pub fn with_direction(&self, direction: RankDirection) -> DensityRanking {
        let mut out = self.clone();
        out.order = rank_order(&self.scores, &self.isolated, direction);
        out.params.direction = direction;
        out
    }

    /// `vertex_id,score,rank` rows in rank order.
    pub fn to_csv(&self) -> String {
        let ranks = self.ranks();
        let mut out = String::from("vertex_id,score,rank\n");
        for &v in &self.order {
            let _ = writeln!(out, "{v},{},{}", self.scores[v], ranks[v]);
        }
        out
    }

    /// Writes the CSV to `path` and the parameter sidecar next to it
    /// (`path` with a `.json` extension).
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))?;
        let sidecar = path.with_extension("json");
        let json = serde_json::to_string_pretty(&RankingSidecar {
            params: self.params.clone(),
            isolated: (0..self.n()).filter(|&v| self.isolated[v]).collect(),
        })?;
        fs::write(&sidecar, json + "\n").map_err(|e| Error::io(&sidecar, e))
    }

    pub fn read(path: &Path) -> Result<DensityRanking> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: idx + 1, msg };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad("expected vertex_id,score,rank".into()));
            }
            let v: usize = fields[0].trim().parse().map_err(|e| bad(format!("{e}")))?;
            let s: f64 = fields[1].trim().parse().map_err(|e| bad(format!("{e}")))?;
            let r: usize = fields[2].trim().parse().map_err(|e| bad(format!("{e}")))?;
            rows.push((v, s, r));
        }
        let n = rows.len();
        let mut scores = vec![f64::NAN; n];
        let mut order = vec![usize::MAX; n];
        for &(v, s, r) in &rows {
            if v >= n || r == 0 || r > n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("vertex {v} / rank {r} out of range for {n} rows"),
                });
            }
            scores[v] = s;
            order[r - 1] = v;
        }
        if order.contains(&usize::MAX) || scores.iter().any(|s| s.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                msg: "ranking is not a permutation of 0..n".into(),
            });
        }
        let sidecar = path.with_extension("json");
        let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        let meta: RankingSidecar = serde_json::from_str(&text)?;
        let mut isolated = vec![false; n];
        for v in meta.isolated {
            if v < n {
                isolated[v] = true;
            }
        }
        Ok(DensityRanking {
            scores,
            order,
            isolated,
            params: meta.params,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RankingSidecar {
    #[serde(flatten)]
    params: RankingParams,
    isolated: Vec<usize>,
}

/// The top `ceil((1 - random_mix_frac) k)` vertices of the ranking plus
/// uniformly drawn other vertices up to `k` in total.
pub fn select_initializers(ranking: &DensityRanking, k: usize, random_mix_frac: f64, seed: u64) -> Result<Vec<usize>> {
    let n = ranking.n();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("{k} not in 1..={n}")));
    }
    if !(0.0..=1.0).contains(&random_mix_frac) {
        return Err(Error::param(
            "random_mix_frac",
            format!("{random_mix_frac} not in [0, 1]"),
        ));
    }
    let top = (((1.0 - random_mix_frac) * k as f64) - 1e-9).ceil().max(0.0) as usize;
    let top = top.min(k);
    let mut chosen: Vec<usize> = ranking.order[..top].to_vec();
    let rest = &ranking.order[top..];
    let mut rng = rng::stream(seed, "initializers", 0);
    let picks = index::sample(&mut rng, rest.len(), k - top);
    chosen.extend(picks.iter().map(|i| rest[i]));
    Ok(chosen)
}

/// Default dense-set size: `max(10, ceil(0.1 n))`, capped at `n`.
pub fn default_dense_k(n: usize) -> usize {
    10usize.max(n.div_ceil(10)).min(n)
}
