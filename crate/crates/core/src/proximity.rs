//! Transition matrix and truncated restart-discounted proximity.
//!
//! For a graph with row-stochastic transition matrix `P`, the proximity of
//! `m` from `i` over horizon `l` with restart probability `c` is
//!
//! ```text
//! R[i][m] = sum_{k=0..=l} c (1-c)^k P^k[i][m]
//! ```
//!
//! [`proximity_exact`] evaluates the series row by row with sparse
//! vector-matrix products. [`proximity_monte_carlo`] estimates the same
//! quantity from fixed-length walks, crediting `c (1-c)^k` to the vertex
//! occupied at step `k`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

pub const DEFAULT_RESTART: f64 = 0.15;
pub const DEFAULT_MAX_HORIZON: usize = 16;

/// Row-stochastic sparse transition matrix in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    probs: Vec<f64>,
    /// Running sums of `probs` within each row, for sampling.
    cumulative: Vec<f64>,
    uniform: Vec<bool>,
}

/// `P[i][j] = w_ij / sum_k w_ik`; isolated vertices get empty rows.
pub fn transition_matrix(g: &Graph) -> TransitionMatrix {
    let n = g.num_vertices();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    let mut probs = Vec::new();
    let mut cumulative = Vec::new();
    let mut uniform = Vec::with_capacity(n);
    indptr.push(0);
    for u in 0..n {
        let nbrs = g.neighbors(u);
        let total: f64 = nbrs.iter().map(|&(_, w)| w).sum();
        let mut acc = 0.0;
        for &(v, w) in nbrs {
            let p = w / total;
            acc += p;
            indices.push(v);
            probs.push(p);
            cumulative.push(acc);
        }
        uniform.push(nbrs.windows(2).all(|p| p[0].1 == p[1].1));
        indptr.push(indices.len());
    }
    TransitionMatrix {
        indptr,
        indices,
        probs,
        cumulative,
        uniform,
    }
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.indptr.len() - 1
    }

    /// `(column, probability)` pairs of row `i`, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.probs[span].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.probs[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, p)| p).sum()
    }

    /// Draws the next vertex of a walk at `u`, or `None` for an isolated
    /// vertex.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> Option<usize> {
        let (lo, hi) = (self.indptr[u], self.indptr[u + 1]);
        if lo == hi {
            return None;
        }
        if self.uniform[u] {
            return Some(self.indices[lo + rng.random_range(0..hi - lo)]);
        }
        let x = rng.random::<f64>() * self.cumulative[hi - 1];
        let k = self.cumulative[lo..hi].partition_point(|&c| c <= x);
        Some(self.indices[lo + k.min(hi - lo - 1)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Exact,
    MonteCarlo { walks_per_vertex: usize, seed: u64 },
}

/// Sparse nonnegative `n x n` proximity matrix, stored as sorted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    pub horizon: usize,
    pub restart: f64,
    pub origin: Origin,
    rows: Vec<Vec<(usize, f64)>>,
}

impl ProximityMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| row[k].1)
            .unwrap_or(0.0)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    /// `sum_{k=0..=l} c (1-c)^k = 1 - (1-c)^{l+1}`, the row mass of a
    /// vertex that is never stuck.
    pub fn series_mass(horizon: usize, restart: f64) -> f64 {
        1.0 - (1.0 - restart).powi(horizon as i32 + 1)
    }

    /// Dense copy, for small graphs and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(j, v) in row {
                    dense[j] = v;
                }
                dense
            })
            .collect()
    }

    /// Writes `i j value` lines for every stored entry.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                writeln!(out, "{i} {j} {v}")?;
            }
        }
        Ok(())
    }
}

fn check_restart(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::param("restart", format!("{c} not in (0, 1)")))
    }
}

/// Scratch space for one sparse row computation.
struct RowScratch {
    acc: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
    touched_acc: Vec<usize>,
    cur_idx: Vec<usize>,
    next_idx: Vec<usize>,
}

impl RowScratch {
    fn new(n: usize) -> Self {
        RowScratch {
            acc: vec![0.0; n],
            cur: vec![0.0; n],
            next: vec![0.0; n],
            touched_acc: Vec::new(),
            cur_idx: Vec::new(),
            next_idx: Vec::new(),
        }
    }

    /// Drains the accumulator into a sorted sparse row, scaling by `scale`.
    fn take_row(&mut self, scale: f64) -> Vec<(usize, f64)> {
        self.touched_acc.sort_unstable();
        let row = self.touched_acc.iter().map(|&j| (j, self.acc[j] * scale)).collect();
        for &j in &self.touched_acc {
            self.acc[j] = 0.0;
        }
        self.touched_acc.clear();
        row
    }
}

/// Integer visit counts per (vertex, step) for one Monte-Carlo source.
/// Counting first and discounting once keeps the estimate free of
/// accumulation error: a deterministic walk reproduces the exact series.
struct VisitCounts {
    steps: usize,
    counts: Vec<u32>,
    seen: Vec<bool>,
    touched: Vec<usize>,
}

impl VisitCounts {
    fn new(n: usize, horizon: usize) -> Self {
        VisitCounts {
            steps: horizon + 1,
            counts: vec![0; n * (horizon + 1)],
            seen: vec![false; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn visit(&mut self, v: usize, step: usize, times: u32) {
        if !self.seen[v] {
            self.seen[v] = true;
            self.touched.push(v);
        }
        self.counts[v * self.steps + step] += times;
    }

    fn take_row(&mut self, discounts: &[f64], walks: usize) -> Vec<(usize, f64)> {
        self.touched.sort_unstable();
        let mut row = Vec::with_capacity(self.touched.len());
        for &v in &self.touched {
            let cell = &mut self.counts[v * self.steps..(v + 1) * self.steps];
            let value = cell
                .iter()
                .zip(discounts)
                .map(|(&c, &d)| d * (c as f64 / walks as f64))
                .sum();
            cell.fill(0);
            self.seen[v] = false;
            row.push((v, value));
        }
        self.touched.clear();
        row
    }
}

fn exact_row(p: &TransitionMatrix, source: usize, horizon: usize, c: f64, s: &mut RowScratch) -> Vec<(usize, f64)> {
    s.cur[source] = 1.0;
    s.cur_idx.push(source);
    let mut discount = c;
    for step in 0..=horizon {
        for k in 0..s.cur_idx.len() {
            let j = s.cur_idx[k];
            let mass = s.cur[j];
            if mass > 0.0 {
                if s.acc[j] == 0.0 {
                    s.touched_acc.push(j);
                }
                s.acc[j] += discount * mass;
            }
        }
        if step == horizon {
            break;
        }
        for k in 0..s.cur_idx.len() {
            let i = s.cur_idx[k];
            let mass = s.cur[i];
            for (j, pij) in p.row(i) {
                if s.next[j] == 0.0 {
                    s.next_idx.push(j);
                }
                s.next[j] += mass * pij;
            }
            s.cur[i] = 0.0;
        }
        s.cur_idx.clear();
        std::mem::swap(&mut s.cur, &mut s.next);
        std::mem::swap(&mut s.cur_idx, &mut s.next_idx);
        discount *= 1.0 - c;
    }
    for k in 0..s.cur_idx.len() {
        let j = s.cur_idx[k];
        s.cur[j] = 0.0;
    }
    s.cur_idx.clear();
    s.take_row(1.0)
}

/// Truncated series `R = sum_{k=0..=l} c (1-c)^k P^k`, one sparse row per
/// source vertex. Memory stays at O(nnz(R)) plus O(n) scratch per worker.
pub fn proximity_exact(p: &TransitionMatrix, horizon: usize, restart: f64) -> Result<ProximityMatrix> {
    proximity_exact_capped(p, horizon, restart, DEFAULT_MAX_HORIZON)
}

pub fn proximity_exact_capped(
    p: &TransitionMatrix,
    horizon: usize,
    restart: f64,
    max_horizon: usize,
) -> Result<ProximityMatrix> {
    check_restart(restart)?;
    if horizon > max_horizon {
        return Err(Error::param(
            "horizon",
            format!("{horizon} exceeds the configured maximum {max_horizon}"),
        ));
    }
    let n = p.n();
    let rows = (0..n)
        .into_par_iter()
        .map_init(
            || RowScratch::new(n),
            |scratch, i| exact_row(p, i, horizon, restart, scratch),
        )
        .collect();
    Ok(ProximityMatrix {
        horizon,
        restart,
        origin: Origin::Exact,
        rows,
    })
}

/// Monte-Carlo estimate of the proximity matrix from `walks_per_vertex`
/// fixed-length walks per source.
///
/// Each source vertex draws from its own stream derived from `seed`, so the
/// result is bit-identical for any thread count.
pub fn proximity_monte_carlo(
    g: &Graph,
    horizon: usize,
    restart: f64,
    walks_per_vertex: usize,
    seed: u64,
) -> Result<ProximityMatrix> {
    check_restart(restart)?;
    if walks_per_vertex == 0 || walks_per_vertex > u32::MAX as usize {
        return Err(Error::param("walks_per_vertex", "must be in 1..=2^32-1"));
    }
    let p = transition_matrix(g);
    let n = g.num_vertices();
    let discounts: Vec<f64> = (0..=horizon)
        .map(|k| restart * (1.0 - restart).powi(k as i32))
        .collect();
    let rows = (0..n)
        .into_par_iter()
        .map_init(
            || VisitCounts::new(n, horizon),
            |s, i| {
                if p.row_len(i) == 0 {
                    return vec![(i, restart)];
                }
                let mut rng = rng::stream(seed, "proximity-mc", i as u64);
                // every walk sits at its source at step 0
                s.visit(i, 0, walks_per_vertex as u32);
                for _ in 0..walks_per_vertex {
                    let mut at = i;
                    for k in 1..=horizon {
                        // connected vertices always have a successor
                        at = p.step(at, &mut rng).expect("non-isolated walk");
                        s.visit(at, k, 1);
                    }
                }
                s.take_row(&discounts, walks_per_vertex)
            },
        )
        .collect();
    Ok(ProximityMatrix {
        horizon,
        restart,
        origin: Origin::MonteCarlo { walks_per_vertex, seed },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synth;

    #[test]
    fn triangle_rows_are_halves() {
        let p = transition_matrix(&synth::complete(3));
        for i in 0..3 {
            let row: Vec<_> = p.row(i).collect();
            assert_eq!(row.len(), 2);
            assert!(row.iter().all(|&(_, x)| x == 0.5));
        }
    }

    #[test]
    fn star_rows() {
        let p = transition_matrix(&synth::star(3));
        assert_eq!(
            p.row(0).collect::<Vec<_>>(),
            vec![(1, 1.0 / 3.0), (2, 1.0 / 3.0), (3, 1.0 / 3.0)]
        );
        for leaf in 1..=3 {
            assert_eq!(p.row(leaf).collect::<Vec<_>>(), vec![(0, 1.0)]);
        }
    }

    #[test]
    fn weighted_row() {
        let g = Graph::from_edges(3, [(0, 1, 3.0), (0, 2, 1.0)]).unwrap();
        let p = transition_matrix(&g);
        assert_eq!(p.get(0, 1), 0.75);
        assert_eq!(p.get(0, 2), 0.25);
        assert_eq!(p.get(1, 2), 0.0);
    }

    #[test]
    fn isolated_rows_are_empty() {
        let g = Graph::from_pairs(3, &[(0, 1)]).unwrap();
        let p = transition_matrix(&g);
        assert_eq!(p.row_len(2), 0);
        assert_eq!(p.row_sum(2), 0.0);
    }

    #[test]
    fn horizon_zero_is_scaled_identity() {
        let p = transition_matrix(&synth::barbell(4, 2));
        let r = proximity_exact(&p, 0, 0.2).unwrap();
        for i in 0..r.n() {
            assert_eq!(r.row(i), &[(i, 0.2)]);
        }
    }

    #[test]
    fn single_edge_two_terms() {
        let p = transition_matrix(&synth::path(2));
        let r = proximity_exact(&p, 1, 0.15).unwrap();
        assert!((r.get(0, 1) - 0.1275).abs() < 1e-15);
        assert!((r.get(0, 0) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn triangle_horizon_two() {
        let p = transition_matrix(&synth::complete(3));
        let r = proximity_exact(&p, 2, 0.15).unwrap();
        assert!((r.get(0, 1) - 0.09084375).abs() < 1e-15);
    }

    #[test]
    fn restart_out_of_range() {
        let p = transition_matrix(&synth::path(3));
        for c in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(proximity_exact(&p, 2, c).is_err());
            assert!(proximity_monte_carlo(&synth::path(3), 2, c, 10, 0).is_err());
        }
        assert!(proximity_exact(&p, DEFAULT_MAX_HORIZON + 1, 0.15).is_err());
    }

    #[test]
    fn monte_carlo_single_edge_is_exact() {
        let g = synth::path(2);
        let exact = proximity_exact(&transition_matrix(&g), 1, 0.15).unwrap();
        for seed in [0, 1, 99] {
            let mc = proximity_monte_carlo(&g, 1, 0.15, 17, seed).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((mc.get(i, j) - exact.get(i, j)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_rejects_zero_walks() {
        assert!(proximity_monte_carlo(&synth::complete(3), 2, 0.15, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_isolated_vertex_keeps_diagonal() {
        let g = Graph::from_pairs(3, &[(0, 1)]).unwrap();
        let mc = proximity_monte_carlo(&g, 3, 0.15, 5, 2).unwrap();
        assert_eq!(mc.row(2), &[(2, 0.15)]);
    }

    #[test]
    fn weighted_sampling_follows_probabilities() {
        let g = Graph::from_edges(3, [(0, 1, 3.0), (0, 2, 1.0)]).unwrap();
        let p = transition_matrix(&g);
        let mut rng = rng::stream(5, "test", 0);
        let draws = 40_000;
        let ones = (0..draws).filter(|_| p.step(0, &mut rng) == Some(1)).count();
        let sd = (0.75f64 * 0.25 / draws as f64).sqrt();
        assert!((ones as f64 / draws as f64 - 0.75).abs() < 4.0 * sd);
    }

    #[test]
    fn triplet_dump() {
        let r = proximity_exact(&transition_matrix(&synth::path(2)), 1, 0.5).unwrap();
        let mut buf = Vec::new();
        r.write_triplets(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "0 0 0.5\n0 1 0.25\n1 0 0.25\n1 1 0.5\n"
        );
    }
}
