//! Undirected simple graphs stored as sorted adjacency lists (CSR layout).

use std::collections::HashMap;
use std::collections::HashSet;
use std::io::BufRead;

use crate::error::{Error, Result};

/// An undirected simple graph on vertices `0..n`.
///
/// Adjacency lists are sorted and free of duplicates and self-loops; the
/// structure is immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            edge_count: 0,
        }
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(n, edges).expect("complete graph edges are valid")
    }

    /// Build from an edge iterator. Duplicate edges (in either orientation)
    /// are merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            lists[a].push(b);
            lists[b].push(a);
        }
        Ok(Self::from_lists(lists))
    }

    /// Build from per-vertex neighbor lists, which are symmetrized, sorted
    /// and deduplicated. Self-loops are dropped.
    pub(crate) fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let n = lists.len();
        // symmetrize
        let mut extra: Vec<(usize, usize)> = Vec::new();
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                if j != i {
                    extra.push((j, i));
                }
            }
        }
        for (j, i) in extra {
            lists[j].push(i);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            targets.extend(list.iter().copied().filter(|&j| j != i));
            offsets.push(targets.len());
        }
        let edge_count = targets.len() / 2;
        Graph {
            offsets,
            targets,
            edge_count,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of edges `e(G)`.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (a, b) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Edge density `e(G) / e(K_n)`.
    pub fn edge_density(&self) -> f64 {
        let n = self.n() as f64;
        if self.n() < 2 {
            return 0.0;
        }
        self.edge_count as f64 / (n * (n - 1.0) / 2.0)
    }

    /// Relabel vertices: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "permutation of length {} for graph of order {}",
                perm.len(),
                self.n()
            )));
        }
        Self::from_edges(self.n(), self.edges().map(|(a, b)| (perm[a], perm[b])))
    }

    /// A copy with the extra edges added (duplicates merged).
    pub fn with_edges<I>(&self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(self.n(), self.edges().chain(extra))
    }

    /// Subgraph induced on `vertices`, relabelled to `0..vertices.len()` in
    /// the given order.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let index: HashMap<usize, usize> = vertices
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        let lists = vertices
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|u| index.get(u).copied())
                    .collect()
            })
            .collect();
        Self::from_lists(lists)
    }
}

/// Counters for lines dropped while reading an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct LoadWarnings {
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

/// An edge list read from text, with the original vertex tokens.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[v]` is the token that was remapped to vertex `v`.
    pub labels: Vec<String>,
    pub warnings: LoadWarnings,
}

impl LoadedGraph {
    /// Vertex id for an input token, if it appeared in the edge list.
    pub fn vertex_of(&self, token: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == token)
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(v, l)| (l.as_str(), v))
            .collect()
    }
}

/// Read a whitespace separated edge list. Blank lines and lines starting with
/// `#` are skipped. Tokens are remapped to `0..n` by first appearance;
/// duplicate edges and self-loops are dropped and counted.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    let mut warnings = LoadWarnings::default();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected two vertex tokens, found {}", tokens.len()),
            });
        }
        if tokens[0] == tokens[1] {
            warnings.self_loops += 1;
            continue;
        }
        let mut id = |tok: &str| -> usize {
            if let Some(&v) = ids.get(tok) {
                return v;
            }
            let v = labels.len();
            ids.insert(tok.to_string(), v);
            labels.push(tok.to_string());
            v
        };
        let a = id(tokens[0]);
        let b = id(tokens[1]);
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            warnings.duplicate_edges += 1;
            continue;
        }
        edges.push(key);
    }
    let graph = Graph::from_edges(labels.len(), edges)?;
    if warnings.duplicate_edges + warnings.self_loops > 0 {
        log::warn!(
            "edge list: dropped {} duplicate edges and {} self-loops",
            warnings.duplicate_edges,
            warnings.self_loops
        );
    }
    Ok(LoadedGraph {
        graph,
        labels,
        warnings,
    })
}

/// Write `graph` as an edge list using vertex ids.
pub fn write_edge_list<W: std::io::Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    for (a, b) in graph.edges() {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<LoadedGraph> {
        load_edge_list(text.as_bytes())
    }

    #[test]
    fn path_graph() {
        let g = load("0 1\n1 2").unwrap();
        assert_eq!(g.graph.n(), 3);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.graph.neighbors(1), &[0, 2]);
    }

    #[test]
    fn duplicates_and_loops_are_dropped() {
        let g = load("0 1\n1 0\n2 2").unwrap();
        assert_eq!(g.graph.edge_count(), 1);
        assert_eq!(g.graph.n(), 2);
        assert_eq!(
            g.warnings,
            LoadWarnings {
                duplicate_edges: 1,
                self_loops: 1
            }
        );
    }

    #[test]
    fn complete_graph_from_file() {
        let text = "# K4\na b\na c\na d\nb c\nb d\nc d\n";
        let g = load(text).unwrap();
        assert_eq!(g.graph.n(), 4);
        assert_eq!(g.graph.edge_count(), 6);
        assert_eq!(g.graph, Graph::complete(4));
    }

    #[test]
    fn malformed_line_reports_number() {
        match load("0 1\n\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn labels_follow_first_appearance() {
        let g = load("x y\nz x\n").unwrap();
        assert_eq!(g.labels, vec!["x", "y", "z"]);
        assert_eq!(g.vertex_of("z"), Some(2));
    }

    #[test]
    fn rejects_self_loop_in_builder() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(1, 3)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = Graph::from_edges(5, [(4, 0), (2, 0), (1, 0), (1, 2), (2, 1)]).unwrap();
        assert_eq!(g.edge_count(), 4);
        for v in 0..5 {
            let nb = g.neighbors(v);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for &u in nb {
                assert!(g.neighbors(u).contains(&v));
            }
        }
        let total: usize = (0..5).map(|v| g.degree(v)).sum();
        assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn relabel_and_induced() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let r = g.relabel(&[2, 0, 1]).unwrap();
        assert!(r.has_edge(2, 0) && r.has_edge(0, 1) && !r.has_edge(2, 1));
        let sub = Graph::complete(5).induced(&[4, 1, 3]);
        assert_eq!(sub, Graph::complete(3));
    }
}
