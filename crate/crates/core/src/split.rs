//! Connectivity-preserving train/validation/test edge split.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{read_pairs, Graph};
use crate::rng;

pub const DEFAULT_VAL_FRAC: f64 = 0.05;
pub const DEFAULT_TEST_FRAC: f64 = 0.10;

pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train: Graph,
    pub val_edges: Vec<Edge>,
    pub test_edges: Vec<Edge>,
    pub val_nonedges: Vec<Edge>,
    pub test_nonedges: Vec<Edge>,
    pub seed: u64,
    pub val_frac: f64,
    pub test_frac: f64,
    /// Held-out edges that were requested but could not be removed without
    /// disconnecting the training graph.
    pub shortfall: usize,
}

/// Number of edges a fraction asks for. The epsilon absorbs products such as
/// `0.1 * 30` landing a hair under an integer.
fn requested(frac: f64, m: usize) -> usize {
    (frac * m as f64 + 1e-9).floor() as usize
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Splits the edges of a connected graph into train / validation / test.
///
/// A random spanning tree (random-order Kruskal) is protected; held-out edges
/// are drawn uniformly from the remaining edges so the training graph stays
/// connected. Matching nonedge sets are sampled uniformly without
/// replacement. The result depends only on the inputs and `seed`.
pub fn split_edges(g: &Graph, val_frac: f64, test_frac: f64, seed: u64) -> Result<EdgeSplit> {
    for (name, frac) in [("val_frac", val_frac), ("test_frac", test_frac)] {
        if !(0.0..0.5).contains(&frac) {
            return Err(Error::param(name, format!("{frac} not in [0, 0.5)")));
        }
    }
    if val_frac + test_frac >= 0.5 {
        return Err(Error::param(
            "test_frac",
            format!("val_frac + test_frac = {} must be < 0.5", val_frac + test_frac),
        ));
    }
    let components = g.num_components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }

    let n = g.num_vertices();
    let mut edges = g.edge_pairs();
    let m = edges.len();
    let want_val = requested(val_frac, m);
    let want_test = requested(test_frac, m);

    let mut rng = rng::stream(seed, "split-tree", 0);
    edges.shuffle(&mut rng);
    let mut uf = UnionFind::new(n);
    let mut removable: Vec<Edge> = edges.iter().copied().filter(|&(u, v)| !uf.union(u, v)).collect();
    // Kruskal's scan order already randomizes the tree; reshuffle the
    // leftovers with an independent stream so selection does not mirror it.
    removable.sort_unstable();
    let mut rng = rng::stream(seed, "split-holdout", 0);
    removable.shuffle(&mut rng);

    let val_count = want_val.min(removable.len());
    let test_count = want_test.min(removable.len() - val_count);
    let shortfall = (want_val - val_count) + (want_test - test_count);
    if shortfall > 0 {
        log::warn!(
            "only {} removable edges; held-out sets short by {shortfall}",
            removable.len()
        );
    }
    let mut val_edges = removable[..val_count].to_vec();
    let mut test_edges = removable[val_count..val_count + test_count].to_vec();
    val_edges.sort_unstable();
    test_edges.sort_unstable();

    let held: Vec<Edge> = val_edges.iter().chain(&test_edges).copied().collect();
    let train = g.without_edges(&held)?;

    let needed = val_count + test_count;
    let nonedges = sample_nonedges(g, needed, seed)?;
    let mut val_nonedges = nonedges[..val_count].to_vec();
    let mut test_nonedges = nonedges[val_count..].to_vec();
    val_nonedges.sort_unstable();
    test_nonedges.sort_unstable();

    Ok(EdgeSplit {
        train,
        val_edges,
        test_edges,
        val_nonedges,
        test_nonedges,
        seed,
        val_frac,
        test_frac,
        shortfall,
    })
}

/// `count` distinct vertex pairs absent from `g`, uniformly without
/// replacement, in sampling order.
fn sample_nonedges(g: &Graph, count: usize, seed: u64) -> Result<Vec<Edge>> {
    let n = g.num_vertices();
    let total_pairs = n * n.saturating_sub(1) / 2;
    let available = total_pairs - g.num_edges();
    if count > available {
        return Err(Error::InsufficientNonedges {
            needed: count,
            available,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng::stream(seed, "split-nonedges", 0);
    if count * 4 >= available {
        // dense regime: enumerate the complement and take a random prefix
        let mut all: Vec<Edge> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        let (picked, _) = all.partial_shuffle(&mut rng, count);
        return Ok(picked.to_vec());
    }
    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if g.has_edge(pair.0, pair.1) || !chosen.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SplitMeta {
    pub seed: u64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub num_vertices: usize,
    pub num_train_edges: usize,
    pub shortfall: usize,
    /// Original input id of every compacted vertex.
    pub id_mapping: Vec<u64>,
}

fn write_pairs(path: &Path, pairs: &[Edge]) -> Result<()> {
    let text: String = pairs.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl EdgeSplit {
    /// Writes `train.edges`, `val.edges`, `test.edges`, `val.nonedges`,
    /// `test.nonedges` and `meta.json` into `dir`.
    pub fn write_dir(&self, dir: &Path, id_mapping: &[u64]) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.train.save_edge_list(&dir.join("train.edges"))?;
        write_pairs(&dir.join("val.edges"), &self.val_edges)?;
        write_pairs(&dir.join("test.edges"), &self.test_edges)?;
        write_pairs(&dir.join("val.nonedges"), &self.val_nonedges)?;
        write_pairs(&dir.join("test.nonedges"), &self.test_nonedges)?;
        let meta = SplitMeta {
            seed: self.seed,
            val_frac: self.val_frac,
            test_frac: self.test_frac,
            num_vertices: self.train.num_vertices(),
            num_train_edges: self.train.num_edges(),
            shortfall: self.shortfall,
            id_mapping: id_mapping.to_vec(),
        };
        let path = dir.join("meta.json");
        let json = serde_json::to_string_pretty(&meta)?;
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn read_dir(dir: &Path) -> Result<(EdgeSplit, SplitMeta)> {
        let meta_path = dir.join("meta.json");
        if !meta_path.exists() {
            return Err(Error::Missing(format!(
                "no split found at {} (missing meta.json)",
                dir.display()
            )));
        }
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: SplitMeta = serde_json::from_str(&text)?;
        let n = meta.num_vertices;
        let train = Graph::from_edges(n, read_pairs(&dir.join("train.edges"), n)?)?;
        let pairs = |name: &str| -> Result<Vec<Edge>> {
            Ok(read_pairs(&dir.join(name), n)?
                .into_iter()
                .map(|(u, v, _)| (u, v))
                .collect())
        };
        let split = EdgeSplit {
            train,
            val_edges: pairs("val.edges")?,
            test_edges: pairs("test.edges")?,
            val_nonedges: pairs("val.nonedges")?,
            test_nonedges: pairs("test.nonedges")?,
            seed: meta.seed,
            val_frac: meta.val_frac,
            test_frac: meta.test_frac,
            shortfall: meta.shortfall,
        };
        Ok((split, meta))
    }

    /// The original graph: training edges plus both held-out edge sets.
    pub fn full_graph(&self) -> Result<Graph> {
        let held = self.val_edges.iter().chain(&self.test_edges).map(|&(u, v)| (u, v, 1.0));
        Graph::from_edges(self.train.num_vertices(), self.train.edges().chain(held))
    }
}
