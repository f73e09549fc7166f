//! Undirected weighted simple graphs with contiguous vertex ids.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..n`.
///
/// Adjacency lists are sorted by neighbor id and every edge appears in both
/// endpoint lists with the same weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
    num_edges: usize,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            num_edges: 0,
        }
    }

    /// Builds a graph from weighted edges. Self-loops, duplicate edges,
    /// out-of-range ids and non-positive weights are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut num_edges = 0;
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::InvalidEdge {
                    u,
                    v,
                    msg: "self-loop".into(),
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidEdge {
                    u,
                    v,
                    msg: format!("weight {w} is not positive"),
                });
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
            num_edges += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_by_key(|&(v, _)| v);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidEdge {
                    u,
                    v: pair[0].0,
                    msg: "duplicate edge".into(),
                });
            }
        }
        Ok(Graph { adj, num_edges })
    }

    /// Unit-weight convenience constructor.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(n, pairs.iter().map(|&(u, v)| (u, v, 1.0)))
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| list[i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// Edges as `(u, v, w)` with `u < v`, in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| u < v).map(move |&(v, w)| (u, v, w)))
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges().map(|(u, v, _)| (u, v)).collect()
    }

    /// Component label per vertex; labels are assigned in order of each
    /// component's smallest vertex id.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.num_vertices();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn num_components(&self) -> usize {
        self.component_labels().1
    }

    /// True for graphs with exactly one component. The empty graph is not
    /// connected.
    pub fn is_connected(&self) -> bool {
        self.num_components() == 1
    }

    /// Induced subgraph on `vertices` (in the given order); returns the graph
    /// whose vertex `i` corresponds to `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph> {
        let n = self.num_vertices();
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            index.insert(v, i);
        }
        let edges = self
            .edges()
            .filter_map(|(u, v, w)| Some((*index.get(&u)?, *index.get(&v)?, w)));
        Graph::from_edges(vertices.len(), edges)
    }

    /// Copy of the graph with the given edges removed.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Graph> {
        let drop: std::collections::HashSet<(usize, usize)> =
            removed.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        Graph::from_edges(
            self.num_vertices(),
            self.edges().filter(|&(u, v, _)| !drop.contains(&(u, v))),
        )
    }

    /// Stable content hash over vertex count, edges and weights.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update((self.num_vertices() as u64).to_le_bytes());
        for (u, v, w) in self.edges() {
            hasher.update((u as u64).to_le_bytes());
            hasher.update((v as u64).to_le_bytes());
            hasher.update(w.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(first)
    }

    /// Edge-list text: one `u v` line per edge, `u v w` when the weight is
    /// not 1.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v, w) in self.edges() {
            if w == 1.0 {
                let _ = writeln!(out, "{u} {v}");
            } else {
                let _ = writeln!(out, "{u} {v} {w}");
            }
        }
        out
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

/// Counts reported by the edge-list loader.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub lines: usize,
    pub duplicates: usize,
    pub reciprocal: usize,
}

/// A loaded graph together with the original id of every compacted vertex.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[v]` is the id vertex `v` carried in the input file.
    pub original_ids: Vec<u64>,
    pub stats: LoadStats,
}

/// Parses edge-list text. Ids are compacted to `0..n` in ascending order of
/// their original values.
///
/// Repeated lines and reversed pairs collapse to one undirected edge keeping
/// the first weight. With `directed_input` a reversed pair is counted as a
/// reciprocal arc rather than a duplicate.
pub fn parse_edge_list(text: &str, directed_input: bool) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    let mut seen: HashMap<(u64, u64), (u64, u64)> = HashMap::new();
    let mut stats = LoadStats::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        stats.lines += 1;
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `u v [w]`, got {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| {
            s.parse::<u64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad vertex id `{s}`: {e}"),
            })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad weight `{s}`: {e}"),
            })?,
            None => 1.0,
        };
        if u == v {
            return Err(Error::SelfLoop {
                line: line_no,
                vertex: u,
            });
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NonPositiveWeight {
                line: line_no,
                weight: w,
            });
        }
        let key = (u.min(v), u.max(v));
        match seen.get(&key) {
            Some(&first) => {
                if directed_input && first != (u, v) {
                    stats.reciprocal += 1;
                } else {
                    stats.duplicates += 1;
                }
            }
            None => {
                seen.insert(key, (u, v));
                raw.push((key.0, key.1, w));
            }
        }
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let graph = Graph::from_edges(ids.len(), raw.iter().map(|&(u, v, w)| (index[&u], index[&v], w)))?;
    Ok(LoadedGraph {
        graph,
        original_ids: ids,
        stats,
    })
}

pub fn load_edge_list(path: &Path, directed_input: bool) -> Result<LoadedGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, directed_input)
}

/// Reads `u v [w]` lines over an already-compacted id space of size `n`,
/// without renumbering. Used for split files.
pub fn read_pairs(path: &Path, n: usize) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad(format!("expected `u v [w]` in {}", path.display())));
        }
        let u: usize = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
        let v: usize = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
        let w: f64 = match fields.get(2) {
            Some(s) => s.parse().map_err(|e| bad(format!("{e}")))?,
            None => 1.0,
        };
        for x in [u, v] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        out.push((u, v, w));
    }
    Ok(out)
}

/// Largest connected component with ids recompacted, plus the map from new
/// ids to ids in `g`. Ties go to the component containing the smallest id.
pub fn largest_connected_component(g: &Graph) -> Result<(Graph, Vec<usize>)> {
    if g.num_vertices() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (labels, count) = g.component_labels();
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    // labels follow smallest-vertex order, so the first maximum wins ties
    let best = (0..count).fold(0, |best, l| if sizes[l] > sizes[best] { l } else { best });
    let keep: Vec<usize> = (0..g.num_vertices()).filter(|&v| labels[v] == best).collect();
    let sub = g.induced_subgraph(&keep)?;
    Ok((sub, keep))
}

/// Edges inside `subset` divided by the subset size.
pub fn subgraph_density(g: &Graph, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::param("vertex_subset", "must be non-empty"));
    }
    let n = g.num_vertices();
    let mut member = vec![false; n];
    for &v in subset {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        member[v] = true;
    }
    let size = member.iter().filter(|&&m| m).count();
    let internal = g.edges().filter(|&(u, v, _)| member[u] && member[v]).count();
    Ok(internal as f64 / size as f64)
}

/// Small synthetic graphs used by tests, examples and benchmarks.
pub mod synth {
    use rand::Rng;

    use super::Graph;
    use crate::rng;

    pub fn path(n: usize) -> Graph {
        let pairs: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_pairs(n, &pairs).expect("valid path")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        let mut pairs: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        pairs.push((n - 1, 0));
        Graph::from_pairs(n, &pairs).expect("valid cycle")
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        let pairs: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_pairs(leaves + 1, &pairs).expect("valid star")
    }

    pub fn complete(n: usize) -> Graph {
        let pairs: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_pairs(n, &pairs).expect("valid clique")
    }

    /// Two cliques of size `clique` joined through `path_len` intermediate
    /// vertices. Clique A is `0..clique`, the path is
    /// `clique..clique + path_len`, clique B follows. The bridge vertices are
    /// `clique - 1` and `clique + path_len`.
    pub fn barbell(clique: usize, path_len: usize) -> Graph {
        let off = clique + path_len;
        let mut pairs = Vec::new();
        for a in 0..clique {
            for b in a + 1..clique {
                pairs.push((a, b));
                pairs.push((off + a, off + b));
            }
        }
        let chain: Vec<usize> = std::iter::once(clique - 1)
            .chain(clique..off)
            .chain(std::iter::once(off))
            .collect();
        pairs.extend(chain.windows(2).map(|w| (w[0], w[1])));
        Graph::from_pairs(off + clique, &pairs).expect("valid barbell")
    }

    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = rng::stream(seed, "erdos-renyi", n as u64);
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    pairs.push((u, v));
                }
            }
        }
        Graph::from_pairs(n, &pairs).expect("valid G(n,p)")
    }

    /// Planted partition with `blocks` equal-size blocks (vertex `v` is in
    /// block `v * blocks / n`).
    pub fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
        let mut rng = rng::stream(seed, "planted-partition", n as u64);
        let block = |v: usize| v * blocks / n;
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let p = if block(u) == block(v) { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    pairs.push((u, v));
                }
            }
        }
        Graph::from_pairs(n, &pairs).expect("valid planted partition")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triangle() {
        let g = parse_edge_list("0 1\n1 2\n2 0", false).unwrap().graph;
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert!(g.edges().all(|(_, _, w)| w == 1.0));
    }

    #[test]
    fn reversed_pair_collapses() {
        let loaded = parse_edge_list("0 1\n1 0", false).unwrap();
        assert_eq!(loaded.graph.num_edges(), 1);
        assert_eq!(loaded.graph.edge_pairs(), vec![(0, 1)]);
        assert_eq!(loaded.stats.duplicates, 1);

        let directed = parse_edge_list("0 1\n1 0", true).unwrap();
        assert_eq!(directed.graph, loaded.graph);
        assert_eq!(directed.stats.reciprocal, 1);
    }

    #[test]
    fn duplicate_keeps_first_weight() {
        let g = parse_edge_list("3 7 2.5\n7 3 9\n3 7 4", false).unwrap();
        assert_eq!(g.graph.weight(0, 1), Some(2.5));
        assert_eq!(g.original_ids, vec![3, 7]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# header\n\n10 20 # trailing\n20 30\n", false).unwrap();
        assert_eq!(g.graph.num_edges(), 2);
        assert_eq!(g.original_ids, vec![10, 20, 30]);
    }

    #[test]
    fn loader_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n1 x", false) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1\n\n4 4", false) {
            Err(Error::SelfLoop { line: 3, vertex: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1 0", false) {
            Err(Error::NonPositiveWeight { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("0 1 -2", false),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 2 3", false),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn lcc_drops_isolated_vertex() {
        let g = Graph::from_pairs(4, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.num_vertices(), 3);
        assert_eq!(lcc.num_edges(), 3);
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn lcc_tie_breaks_by_smallest_id() {
        let g = Graph::from_pairs(6, &[(3, 4), (4, 5), (5, 3), (0, 1), (1, 2), (2, 0)]).unwrap();
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(lcc.num_edges(), 3);
    }

    #[test]
    fn lcc_picks_long_path() {
        let loaded = parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n7 8\n8 9\n100 101\n", false).unwrap();
        let (lcc, map) = largest_connected_component(&loaded.graph).unwrap();
        assert_eq!(lcc.num_vertices(), 10);
        assert_eq!(lcc, synth::path(10));
        assert_eq!(map, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn lcc_of_empty_graph_fails() {
        assert!(matches!(
            largest_connected_component(&Graph::empty(0)),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn density_examples() {
        let tri = synth::complete(3);
        assert_eq!(subgraph_density(&tri, &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(subgraph_density(&synth::path(3), &[0, 1, 2]).unwrap(), 2.0 / 3.0);
        assert_eq!(subgraph_density(&synth::star(4), &[0]).unwrap(), 0.0);
        assert!(subgraph_density(&tri, &[]).is_err());
        assert!(subgraph_density(&tri, &[5]).is_err());
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_pairs(2, &[(0, 0)]).is_err());
        assert!(Graph::from_pairs(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_pairs(2, &[(0, 2)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn barbell_shape() {
        let g = synth::barbell(5, 4);
        assert_eq!(g.num_vertices(), 14);
        assert_eq!(g.num_edges(), 2 * 10 + 5);
        assert!(g.is_connected());
        assert_eq!(g.degree(4), 5);
        assert_eq!(g.degree(9), 5);
        assert_eq!(g.degree(6), 2);
    }
}
