//! Shared test support: small-graph enumeration, reference generators and
//! brute-force metric references. Also included by the CLI acceptance
//! harness.

#![allow(dead_code)]

use std::collections::HashSet;

use densewalk::walks::{sample_walks, Strategy, WalkConfig};
use densewalk::{Graph, Result, ScoreMatrix, WalkGenerator, WalkSet};
use rand::Rng;

/// Adjacency bitmasks of a graph on at most 8 vertices.
type Adj = Vec<u8>;

fn refine_colors(adj: &Adj) -> Vec<usize> {
    let n = adj.len();
    let mut colors: Vec<usize> = adj.iter().map(|r| r.count_ones() as usize).collect();
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&u| adj[v] >> u & 1 == 1).map(|u| colors[u]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        let before = colors.iter().collect::<HashSet<_>>().len();
        colors = next;
        if distinct.len() == before {
            return colors;
        }
    }
}

fn permutations_within_cells(cells: &[Vec<usize>], at: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if at == cells.len() {
        out(prefix);
        return;
    }
    let mut cell = cells[at].clone();
    permute(&mut cell, 0, &mut |p| {
        let len = prefix.len();
        prefix.extend_from_slice(p);
        permutations_within_cells(cells, at + 1, prefix, out);
        prefix.truncate(len);
    });
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        out(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Isomorphism-invariant code: the smallest upper-triangle bit string over
/// all relabelings that respect the refined color classes.
fn canonical_code(adj: &Adj) -> (usize, u32) {
    let n = adj.len();
    let colors = refine_colors(adj);
    let ncolors = colors.iter().max().map_or(0, |m| m + 1);
    let cells: Vec<Vec<usize>> = (0..ncolors)
        .map(|c| (0..n).filter(|&v| colors[v] == c).collect())
        .collect();
    let mut best = u32::MAX;
    permutations_within_cells(&cells, 0, &mut Vec::with_capacity(n), &mut |order| {
        let mut code = 0u32;
        for i in 0..n {
            for j in i + 1..n {
                code = code << 1 | (adj[order[i]] >> order[j] & 1) as u32;
            }
        }
        best = best.min(code);
    });
    (n, best)
}

/// One representative of every isomorphism class of simple graphs on `n`
/// vertices, built by adding a vertex to every class on `n - 1` vertices.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!((1..=8).contains(&n));
    let mut layer: Vec<Adj> = vec![vec![0]];
    for size in 2..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &layer {
            for mask in 0..1u16 << (size - 1) {
                let mask = mask as u8;
                let mut adj = g.clone();
                adj.push(mask);
                for (u, row) in adj.iter_mut().enumerate().take(size - 1) {
                    *row |= (mask >> u & 1) << (size - 1);
                }
                if seen.insert(canonical_code(&adj)) {
                    next.push(adj);
                }
            }
        }
        layer = next;
    }
    layer.iter().map(to_graph).collect()
}

fn to_graph(adj: &Adj) -> Graph {
    let n = adj.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).filter(move |&v| adj[u] >> v & 1 == 1).map(move |v| (u, v)))
        .collect();
    Graph::from_pairs(n, &pairs).unwrap()
}

pub fn connected_graphs(n: usize) -> Vec<Graph> {
    all_graphs(n).into_iter().filter(|g| g.is_connected()).collect()
}

/// Emits uniform random walks over a fixed graph, ignoring its training
/// input. Pointed at the full graph it leaks the held-out edges.
pub struct LeakGenerator {
    pub full: Graph,
}

impl WalkGenerator for LeakGenerator {
    fn id(&self) -> String {
        "leak".into()
    }

    fn fit(&mut self, _train: &WalkSet, _g: &Graph) -> Result<()> {
        Ok(())
    }

    fn generate(&self, count: usize, walk_length: usize, seed: u64) -> Result<WalkSet> {
        let cfg = WalkConfig {
            walk_length,
            batch_size: count,
            num_batches: 1,
            strategy: Strategy::UniformRandom,
            seed,
        };
        sample_walks(&self.full, &cfg, None)
    }
}

/// One-step walks between uniformly random distinct vertices.
pub struct UniformPairGenerator {
    pub n: usize,
}

impl WalkGenerator for UniformPairGenerator {
    fn id(&self) -> String {
        "uniform-pairs".into()
    }

    fn fit(&mut self, _train: &WalkSet, _g: &Graph) -> Result<()> {
        Ok(())
    }

    fn generate(&self, count: usize, _walk_length: usize, seed: u64) -> Result<WalkSet> {
        let mut rng = densewalk::rng::stream(seed, "uniform-pairs", 0);
        let mut out = WalkSet::new(1);
        while out.len() < count {
            let u = rng.random_range(0..self.n);
            let v = rng.random_range(0..self.n);
            if u != v {
                out.push(&[u, v])?;
            }
        }
        Ok(out)
    }
}

/// Naive O(P * N) pair loop.
pub fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &q in neg {
            if p > q {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Precision at each positive's rank, averaged over positives. Items are
/// `(score, pair, is_positive)`; ties rank the smaller pair first.
pub fn brute_ap(items: &[(f64, (usize, usize), bool)]) -> f64 {
    let ahead =
        |a: &(f64, (usize, usize), bool), b: &(f64, (usize, usize), bool)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut ranked: Vec<(usize, usize)> = Vec::new();
    for it in items {
        if !it.2 {
            continue;
        }
        let rank = 1 + items.iter().filter(|o| ahead(o, it)).count();
        let hits = 1 + items.iter().filter(|o| o.2 && ahead(o, it)).count();
        ranked.push((rank, hits));
    }
    ranked.sort_unstable();
    let total = ranked.len() as f64;
    ranked
        .iter()
        .map(|&(rank, hits)| hits as f64 / rank as f64)
        .sum::<f64>()
        / total
}

/// Score matrix from explicit pair counts.
pub fn scores_from_counts(n: usize, counts: &[((usize, usize), usize)]) -> ScoreMatrix {
    let mut walks = WalkSet::new(1);
    for &((u, v), c) in counts {
        for _ in 0..c {
            walks.push(&[u, v]).unwrap();
        }
    }
    densewalk::assemble_scores(&walks, n).unwrap()
}
