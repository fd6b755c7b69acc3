//! Block-kernel estimation from one observed graph.
//!
//! Louvain gives an initial partition with `k0` blocks. Candidates with
//! between `k0 - r` and `k0 + r` blocks, `r = max(1, round(k0 / 10))`, are
//! produced by greedy AIC-optimal merges of block pairs and splits of one
//! block along its own Louvain communities. The candidate with the lowest
//! AIC is kept; ties go to fewer blocks.

use serde::Serialize;

use super::louvain::{louvain, LouvainOptions, Partition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::random_graph::Kernel;

/// A fitted block model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockFit {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    /// `B_hat[b][c]`: edge frequency between blocks `b` and `c`.
    pub b_hat: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub aic: f64,
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

impl BlockFit {
    /// Fit `B_hat` for a fixed labeling with blocks `0..k`.
    pub fn from_labels(graph: &Graph, labels: &[usize], k: usize) -> Result<Self> {
        let mut sizes = vec![0usize; k];
        for &l in labels {
            sizes[l] += 1;
        }
        if let Some(b) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::DegeneratePartition(b));
        }
        let mut edges = vec![vec![0u64; k]; k];
        for (a, b) in graph.edges() {
            let (x, y) = (labels[a], labels[b]);
            edges[x][y] += 1;
            if x != y {
                edges[y][x] += 1;
            }
        }
        let mut b_hat = vec![vec![0.0; k]; k];
        let mut loglik = 0.0;
        for r in 0..k {
            for c in r..k {
                let pairs = if r == c {
                    (sizes[r] * (sizes[r] - 1) / 2) as f64
                } else {
                    (sizes[r] * sizes[c]) as f64
                };
                let e = edges[r][c] as f64;
                let p = if pairs > 0.0 { e / pairs } else { 0.0 };
                b_hat[r][c] = p;
                b_hat[c][r] = p;
                loglik += xlogy(e, p) + xlogy(pairs - e, 1.0 - p);
            }
        }
        let params = (k * (k + 1) / 2) as f64;
        Ok(BlockFit {
            k,
            assignment: labels.to_vec(),
            sizes,
            b_hat,
            log_likelihood: loglik,
            aic: 2.0 * params - 2.0 * loglik,
        })
    }

    /// The fitted kernel: `B_hat` with proportions `|P_b| / n`, used with
    /// `rho = 1`.
    pub fn kernel(&self) -> Result<Kernel> {
        let n: usize = self.sizes.iter().sum();
        let pi = self.sizes.iter().map(|&s| s as f64 / n as f64).collect();
        // a block with no observed edges at all makes B_hat's row zero
        let mut b = self.b_hat.clone();
        for (r, row) in b.iter_mut().enumerate() {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::DegeneratePartition(r));
            }
        }
        b.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0)));
        Kernel::new(b, pi)
    }

    /// Block labels in the grid arrangement used for bootstrap replicates:
    /// the first `|P_0|` vertices in block 0, and so on.
    pub fn grid_blocks(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }
}

fn canonical(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

fn fit(graph: &Graph, labels: &[usize]) -> Result<BlockFit> {
    let (labels, k) = canonical(labels);
    BlockFit::from_labels(graph, &labels, k)
}

/// Best merge of two blocks by AIC.
fn best_merge(graph: &Graph, current: &BlockFit) -> Result<Option<BlockFit>> {
    let mut best: Option<BlockFit> = None;
    for a in 0..current.k {
        for b in a + 1..current.k {
            let labels: Vec<usize> = current.assignment.iter().map(|&l| if l == b { a } else { l }).collect();
            let cand = fit(graph, &labels)?;
            if best.as_ref().is_none_or(|x| cand.aic < x.aic) {
                best = Some(cand);
            }
        }
    }
    Ok(best)
}

/// Best split of one block by AIC. A block is split into its largest
/// Louvain sub-community and the rest.
fn best_split(graph: &Graph, current: &BlockFit, seed: Option<u64>) -> Result<Option<BlockFit>> {
    let mut best: Option<BlockFit> = None;
    for b in 0..current.k {
        let members: Vec<usize> = (0..graph.n()).filter(|&v| current.assignment[v] == b).collect();
        if members.len() < 2 {
            continue;
        }
        let sub = graph.induced(&members);
        let side: Vec<bool> = if sub.edge_count() == 0 {
            // no internal structure: split off half of the block
            (0..members.len()).map(|t| t < members.len() / 2).collect()
        } else {
            let p = louvain(&sub, LouvainOptions { shuffle_seed: seed })?;
            if p.k < 2 {
                continue;
            }
            let sizes = p.sizes();
            let largest = (0..p.k).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();
            p.labels.iter().map(|&l| l == largest).collect()
        };
        if side.iter().all(|&s| s) || side.iter().all(|&s| !s) {
            continue;
        }
        let mut labels = current.assignment.clone();
        for (t, &v) in members.iter().enumerate() {
            if side[t] {
                labels[v] = current.k;
            }
        }
        let cand = fit(graph, &labels)?;
        if best.as_ref().is_none_or(|x| cand.aic < x.aic) {
            best = Some(cand);
        }
    }
    Ok(best)
}

/// Options for [`fit_blockmodel`].
#[derive(Clone, Copy, Debug, Default)]
pub struct FitOptions {
    pub shuffle_seed: Option<u64>,
    /// Skip the AIC scan and keep the Louvain partition.
    pub louvain_only: bool,
}

/// A block none of whose vertices has an edge cannot be standardized.
fn has_edgeless_block(fit: &BlockFit) -> bool {
    fit.b_hat.iter().any(|row| row.iter().all(|&v| v == 0.0))
}

/// Louvain leaves isolated vertices as singleton communities; move every
/// edgeless community into the largest one.
fn fold_isolated(graph: &Graph, partition: &Partition) -> Vec<usize> {
    let mut has_edge = vec![false; partition.k];
    for v in 0..graph.n() {
        if graph.degree(v) > 0 {
            has_edge[partition.labels[v]] = true;
        }
    }
    let sizes = partition.sizes();
    let Some(host) = (0..partition.k).filter(|&c| has_edge[c]).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
        return partition.labels.clone();
    };
    partition
        .labels
        .iter()
        .map(|&l| if has_edge[l] { l } else { host })
        .collect()
}

/// Fit a block model: Louvain partition, then AIC scan over nearby `k`.
pub fn fit_blockmodel(graph: &Graph, options: FitOptions) -> Result<BlockFit> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let partition: Partition = louvain(graph, LouvainOptions { shuffle_seed: options.shuffle_seed })?;
    let base = fit(graph, &fold_isolated(graph, &partition))?;
    if options.louvain_only {
        return Ok(base);
    }
    let radius = ((base.k as f64 * 0.1).round() as usize).max(1);
    let mut candidates = vec![base.clone()];
    let mut current = base.clone();
    for _ in 0..radius {
        if current.k < 2 {
            break;
        }
        match best_merge(graph, &current)? {
            Some(next) => {
                candidates.push(next.clone());
                current = next;
            }
            None => break,
        }
    }
    current = base;
    for _ in 0..radius {
        match best_split(graph, &current, options.shuffle_seed)? {
            Some(next) => {
                candidates.push(next.clone());
                current = next;
            }
            None => break,
        }
    }
    let best = candidates
        .into_iter()
        .filter(|c| !has_edgeless_block(c))
        .min_by(|a, b| a.aic.total_cmp(&b.aic).then(a.k.cmp(&b.k)))
        .expect("the Louvain candidate has no edgeless block");
    Ok(best)
}
