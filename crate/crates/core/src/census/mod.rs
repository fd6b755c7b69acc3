//! Per-vertex rooted counts `X_F(G, i)` and rooted densities `s_i(F, G)`.
//!
//! Counting follows non-induced semantics: a copy is any subgraph of `G`
//! (edge subset) rooted-isomorphic to the motif. The generic counter
//! enumerates injective embeddings anchored at the root and divides by the
//! automorphism count once at the end.

pub mod fast;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::RootedMotif;

/// Search order for embedding a motif: motif vertices are visited in BFS
/// order from the root so every new vertex has an already-placed neighbor.
#[derive(Clone, Debug)]
pub(crate) struct EmbeddingPlan {
    order: Vec<usize>,
    /// For each step `p >= 1`: the earlier step whose image supplies candidates.
    parent: Vec<usize>,
    /// For each step: the other earlier steps that must be adjacent.
    checks: Vec<Vec<usize>>,
}

impl EmbeddingPlan {
    pub(crate) fn new(motif: &RootedMotif) -> Self {
        let n = motif.order();
        let mut order = vec![0];
        let mut placed = 1u16;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for u in 0..n {
                if motif.is_adjacent(v, u) && placed & (1 << u) == 0 {
                    placed |= 1 << u;
                    order.push(u);
                }
            }
        }
        let step_of = |v: usize| order.iter().position(|&x| x == v).unwrap();
        let mut parent = vec![0; n];
        let mut checks = vec![Vec::new(); n];
        for p in 1..n {
            let v = order[p];
            let earlier: Vec<usize> = (0..p).filter(|&q| motif.is_adjacent(order[q], v)).collect();
            // prefer the most recently placed neighbor as candidate source
            let src = *earlier.iter().max_by_key(|&&q| (q != 0, q)).unwrap();
            parent[p] = src;
            checks[p] = earlier.into_iter().filter(|&q| q != src).collect();
            debug_assert_eq!(step_of(v), p);
        }
        EmbeddingPlan {
            order,
            parent,
            checks,
        }
    }

    /// Number of injective, edge-preserving maps sending the root to `vertex`.
    pub(crate) fn count_embeddings(&self, graph: &Graph, vertex: usize) -> u64 {
        let mut image = vec![usize::MAX; self.order.len()];
        image[0] = vertex;
        self.extend(graph, &mut image, 1)
    }

    fn extend(&self, graph: &Graph, image: &mut [usize], p: usize) -> u64 {
        if p == image.len() {
            return 1;
        }
        let src = image[self.parent[p]];
        let mut total = 0u64;
        'cand: for &c in graph.neighbors(src) {
            if image[..p].contains(&c) {
                continue;
            }
            for &q in &self.checks[p] {
                if !graph.has_edge(image[q], c) {
                    continue 'cand;
                }
            }
            image[p] = c;
            total += self.extend(graph, image, p + 1);
        }
        image[p] = usize::MAX;
        total
    }
}

/// `X_F(G, i)` by backtracking enumeration of root-anchored embeddings.
pub fn rooted_count(graph: &Graph, vertex: usize, motif: &RootedMotif) -> Result<u64> {
    check_vertex(graph, vertex)?;
    let aut = motif.aut_count()?;
    let plan = EmbeddingPlan::new(motif);
    divide_exact(plan.count_embeddings(graph, vertex), aut)
}

fn divide_exact(embeddings: u64, aut: u64) -> Result<u64> {
    if !embeddings.is_multiple_of(aut) {
        return Err(Error::Invariant(format!(
            "embedding count {embeddings} not divisible by aut {aut}"
        )));
    }
    Ok(embeddings / aut)
}

fn check_vertex(graph: &Graph, vertex: usize) -> Result<()> {
    if vertex >= graph.n() {
        return Err(Error::InvalidInput(format!(
            "vertex {vertex} out of range for graph of order {}",
            graph.n()
        )));
    }
    Ok(())
}

/// How counts for a motif are produced.
#[derive(Clone, Debug)]
enum Counter {
    Fast(fast::FastMotif),
    Generic { plan: EmbeddingPlan, aut: u64 },
}

impl Counter {
    fn new(motif: &RootedMotif) -> Result<Self> {
        if let Some(kind) = fast::FastMotif::detect(motif)? {
            return Ok(Counter::Fast(kind));
        }
        Ok(Counter::Generic {
            plan: EmbeddingPlan::new(motif),
            aut: motif.aut_count()?,
        })
    }

    fn at(&self, graph: &Graph, vertex: usize) -> Result<u64> {
        match self {
            Counter::Fast(kind) => kind.count_at(graph, vertex),
            Counter::Generic { plan, aut } => divide_exact(plan.count_embeddings(graph, vertex), *aut),
        }
    }

    fn all(&self, graph: &Graph) -> Result<Vec<u64>> {
        match self {
            Counter::Fast(kind) => kind.count_all(graph),
            Counter::Generic { .. } => (0..graph.n())
                .into_par_iter()
                .map(|v| self.at(graph, v))
                .collect(),
        }
    }
}

/// `X_F(G, i)` using a closed-form fast path when one exists for the motif.
pub fn count_at(graph: &Graph, vertex: usize, motif: &RootedMotif) -> Result<u64> {
    check_vertex(graph, vertex)?;
    Counter::new(motif)?.at(graph, vertex)
}

/// Rooted counts of one motif at every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountVector {
    pub motif: RootedMotif,
    pub counts: Vec<u64>,
}

impl CountVector {
    /// Counts at every vertex. Work is split by root vertex; each result
    /// lands in its own slot so the output does not depend on thread count.
    pub fn compute(graph: &Graph, motif: &RootedMotif) -> Result<Self> {
        let counts = Counter::new(motif)?.all(graph)?;
        Ok(CountVector {
            motif: motif.clone(),
            counts,
        })
    }
}

/// Rooted densities for `d` motifs at all `n` vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    pub motifs: Vec<RootedMotif>,
    pub counts: Vec<CountVector>,
    /// Row-major `n x d` densities.
    values: Vec<f64>,
    pub n: usize,
    pub edge_count: usize,
    /// `e(G) / e(K_n)`.
    pub rho_hat: f64,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.motifs.len()
    }

    #[inline]
    pub fn value(&self, vertex: usize, motif: usize) -> f64 {
        self.values[vertex * self.motifs.len() + motif]
    }

    /// Densities of every motif at `vertex`.
    pub fn row(&self, vertex: usize) -> &[f64] {
        let d = self.motifs.len();
        &self.values[vertex * d..(vertex + 1) * d]
    }

    pub fn column(&self, motif: usize) -> Vec<f64> {
        (0..self.n).map(|v| self.value(v, motif)).collect()
    }

    /// Build densities from precomputed counts.
    pub fn from_counts(graph: &Graph, counts: Vec<CountVector>) -> Result<Self> {
        if graph.edge_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let n = graph.n();
        let rho_hat = graph.edge_density();
        let d = counts.len();
        let mut values = vec![0.0; n * d];
        for (t, cv) in counts.iter().enumerate() {
            let complete = cv.motif.count_in_complete(n)?;
            if complete == 0 {
                return Err(Error::InvalidInput(format!(
                    "motif {} has more vertices than the graph ({n})",
                    cv.motif
                )));
            }
            let scale = rho_hat.powi(-(cv.motif.edge_count() as i32)) / complete as f64;
            for (v, &c) in cv.counts.iter().enumerate() {
                values[v * d + t] = c as f64 * scale;
            }
        }
        Ok(DensityMatrix {
            motifs: counts.iter().map(|c| c.motif.clone()).collect(),
            counts,
            values,
            n,
            edge_count: graph.edge_count(),
            rho_hat,
        })
    }
}

/// Rooted densities `s_i(F_t, G)` for every vertex and motif.
pub fn census(graph: &Graph, motifs: &[RootedMotif]) -> Result<DensityMatrix> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let counts = motifs
        .iter()
        .map(|m| CountVector::compute(graph, m))
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::from_counts(graph, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::motif::catalog;

    #[test]
    fn triangle_in_k3() {
        let k3 = Graph::complete(3);
        for v in 0..3 {
            assert_eq!(rooted_count(&k3, v, &catalog::triangle()).unwrap(), 1);
        }
    }

    #[test]
    fn edge_count_is_degree() {
        let g = fixtures::fig_a1().graph;
        for v in 0..g.n() {
            assert_eq!(rooted_count(&g, v, &catalog::edge()).unwrap(), g.degree(v) as u64);
        }
    }

    #[test]
    fn fig_a1_counts() {
        let fx = fixtures::fig_a1();
        let (g, i, j) = (&fx.graph, fx.i, fx.j);
        let x = |v, m: RootedMotif| rooted_count(g, v, &m).unwrap();
        assert_eq!(x(i, catalog::triangle()), 1);
        assert_eq!(x(i, catalog::cherry()), 8);
        assert_eq!(x(i, catalog::diamond()), 0);
        assert_eq!(x(i, catalog::square()), 2);
        assert_eq!(x(j, catalog::triangle()), 2);
        assert_eq!(x(j, catalog::cherry()), 9);
        assert_eq!(x(j, catalog::diamond()), 1);
        assert_eq!(x(j, catalog::square()), 2);
    }

    #[test]
    fn complete_graph_densities_are_one() {
        let g = Graph::complete(7);
        let motifs: Vec<_> = catalog::all().into_iter().map(|(_, m)| m).collect();
        let dm = census(&g, &motifs).unwrap();
        assert_eq!(dm.rho_hat, 1.0);
        for v in 0..7 {
            for t in 0..motifs.len() {
                assert!((dm.value(v, t) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bipartite_graph_has_no_triangles() {
        let edges = (0..4).flat_map(|a| (4..9).map(move |b| (a, b)));
        let g = Graph::from_edges(9, edges).unwrap();
        let dm = census(&g, &[catalog::triangle()]).unwrap();
        assert!(dm.column(0).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn path_cherry_density() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let dm = census(&g, &[catalog::cherry()]).unwrap();
        assert!((dm.value(0, 0) - 1.125).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = Graph::empty(4);
        assert!(matches!(census(&g, &[catalog::edge()]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn motif_larger_than_graph_is_rejected() {
        let g = Graph::complete(3);
        assert!(census(&g, &[catalog::square()]).is_err());
    }

    #[test]
    fn out_of_range_vertex() {
        assert!(rooted_count(&Graph::complete(3), 3, &catalog::edge()).is_err());
    }
}
