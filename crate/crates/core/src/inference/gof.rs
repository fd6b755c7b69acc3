//! Vertex-level goodness-of-fit test of a block model, and the triadic
//! closure perturbation used as an alternative.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blockfit::{fit_blockmodel, BlockFit, FitOptions};
use super::bootstrap::{
    bonferroni_critical_value, bootstrap_moments, critical_value, squared_norm, standardize, BootstrapModel,
    BootstrapMoments, CriticalRule,
};
use crate::census::census;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{catalog, RootedMotif};
use crate::rng::{self, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofConfig {
    pub motifs: Vec<RootedMotif>,
    pub alpha: f64,
    /// Bootstrap replicates for the moments.
    pub moment_replicates: usize,
    /// Replicates for the critical value.
    pub critical_replicates: usize,
    pub rule: CriticalRule,
    pub seed: u64,
    /// Shuffle seed for Louvain; vertex-id order when absent.
    pub louvain_seed: Option<u64>,
}

impl GofConfig {
    pub fn new(seed: u64) -> Self {
        GofConfig {
            motifs: vec![catalog::triangle(), catalog::square()],
            alpha: 0.1,
            moment_replicates: 50,
            critical_replicates: 500,
            rule: CriticalRule::PerReplicateMax,
            seed,
            louvain_seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofResult {
    pub fit: BlockFit,
    pub moments: BootstrapMoments,
    /// `n x d` standardized statistics.
    pub t_hat: Vec<Vec<f64>>,
    /// `||t_hat_i||^2`.
    pub stat: Vec<f64>,
    pub critical_value: f64,
    pub bonferroni_critical_value: f64,
    pub alpha: f64,
    pub rejected: Vec<usize>,
    pub rejected_bonferroni: Vec<usize>,
}

impl GofResult {
    pub fn rejects(&self) -> bool {
        !self.rejected.is_empty()
    }

    pub fn rejects_bonferroni(&self) -> bool {
        !self.rejected_bonferroni.is_empty()
    }
}

/// Fit, bootstrap, standardize and compare with the bootstrap critical value.
pub fn gof_test(graph: &Graph, config: &GofConfig) -> Result<GofResult> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let fit = fit_blockmodel(
        graph,
        FitOptions {
            shuffle_seed: config.louvain_seed,
            louvain_only: false,
        },
    )?;
    let model = BootstrapModel::from_fit(&fit)?;
    let moments = bootstrap_moments(
        &model,
        &config.motifs,
        config.moment_replicates,
        rng::derive_seed(config.seed, stream::REPLICATES, 0),
    )?;
    let densities = census(graph, &config.motifs)?;
    let t_hat = standardize(&densities, &moments, &fit.assignment)?;
    let stat: Vec<f64> = t_hat.iter().map(|t| squared_norm(t)).collect();
    let cv = critical_value(
        &model,
        &moments,
        config.alpha,
        config.critical_replicates,
        rng::derive_seed(config.seed, stream::REPLICATES, 1),
        config.rule,
    )?;
    let bonf = bonferroni_critical_value(config.motifs.len(), graph.n(), config.alpha);
    let over = |c: f64| (0..graph.n()).filter(|&v| stat[v] > c).collect::<Vec<_>>();
    Ok(GofResult {
        rejected: over(cv.value),
        rejected_bonferroni: over(bonf),
        fit,
        moments,
        t_hat,
        critical_value: cv.value,
        bonferroni_critical_value: bonf,
        alpha: config.alpha,
        stat,
    })
}

/// Triadic closure applied to a random subset of vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Closure {
    #[serde(skip)]
    pub graph: Graph,
    pub selected: Vec<usize>,
    pub added_edges: usize,
}

/// Select `round(vertex_fraction * n)` vertices; for each, close an
/// independent `path_fraction` Bernoulli sample of its open 2-paths, both
/// those centered at the vertex and those starting at it.
pub fn triadic_closure(graph: &Graph, vertex_fraction: f64, path_fraction: f64, seed: u64) -> Result<Closure> {
    if !(0.0..=1.0).contains(&vertex_fraction) || !(0.0..=1.0).contains(&path_fraction) {
        return Err(Error::InvalidInput("closure fractions must lie in [0, 1]".into()));
    }
    let n = graph.n();
    let mut rng = rng::chacha(seed, stream::CLOSURE, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let count = (vertex_fraction * n as f64).round() as usize;
    let mut selected: Vec<usize> = order[..count].to_vec();
    selected.sort_unstable();
    let mut added: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &v in &selected {
        let nv = graph.neighbors(v);
        // v in the middle: a - v - b with a, b not adjacent
        for (x, &a) in nv.iter().enumerate() {
            for &b in &nv[x + 1..] {
                if !graph.has_edge(a, b) && rng.gen::<f64>() < path_fraction {
                    added.insert((a, b));
                }
            }
        }
        // v at an end: v - a - b with b not adjacent to v
        for &a in nv {
            for &b in graph.neighbors(a) {
                if b != v && !graph.has_edge(v, b) && rng.gen::<f64>() < path_fraction {
                    added.insert((v.min(b), v.max(b)));
                }
            }
        }
    }
    let added_edges = added.len();
    Ok(Closure {
        graph: graph.with_edges(added)?,
        selected,
        added_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_adds_only_closing_edges() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let c = triadic_closure(&g, 1.0, 1.0, 1).unwrap();
        // every open 2-path is closed: 0-2, 1-3, 2-4
        assert_eq!(c.added_edges, 3);
        assert!(c.graph.has_edge(0, 2) && c.graph.has_edge(1, 3) && c.graph.has_edge(2, 4));
        let none = triadic_closure(&g, 1.0, 0.0, 1).unwrap();
        assert_eq!(none.graph, g);
    }

    #[test]
    fn closure_selects_requested_fraction() {
        let g = Graph::complete(40);
        let c = triadic_closure(&g, 0.05, 0.05, 3).unwrap();
        assert_eq!(c.selected.len(), 2);
        assert_eq!(c.added_edges, 0);
    }

    #[test]
    fn complete_graph_is_a_clean_error() {
        let mut cfg = GofConfig::new(1);
        cfg.moment_replicates = 3;
        cfg.critical_replicates = 3;
        let err = gof_test(&Graph::complete(12), &cfg).unwrap_err();
        assert!(matches!(err, Error::SingularCovariance { .. }), "{err:?}");
    }
}
