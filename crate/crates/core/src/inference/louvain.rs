//! Two-phase Louvain modularity optimisation.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, stream};

const MIN_GAIN: f64 = 1e-12;

/// Community labels `0..k`, numbered by first appearance in vertex order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k: usize,
    pub modularity: f64,
    /// Modularity after each aggregation level.
    pub level_modularity: Vec<f64>,
}

impl Partition {
    pub fn from_labels(graph: &Graph, labels: &[usize]) -> Self {
        let (labels, k) = renumber(labels);
        let modularity = modularity(graph, &labels);
        Partition {
            labels,
            k,
            modularity,
            level_modularity: vec![modularity],
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn members(&self, block: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == block).collect()
    }
}

/// Options for [`louvain`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LouvainOptions {
    /// Shuffle the visiting order with this seed; vertex-id order otherwise.
    pub shuffle_seed: Option<u64>,
}

/// Weighted graph used between aggregation levels. `self_weight[v]` is the
/// total weight of edges inside node `v`.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &Graph) -> Self {
        Level {
            adj: (0..graph.n())
                .map(|v| graph.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
                .collect(),
            self_weight: vec![0.0; graph.n()],
        }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    fn strength(&self, v: usize) -> f64 {
        2.0 * self.self_weight[v] + self.adj[v].iter().map(|&(_, w)| w).sum::<f64>()
    }

    /// One local-moving phase. Returns the community of every node and
    /// whether any node moved.
    fn local_moving(&self, order: &[usize]) -> (Vec<usize>, bool) {
        let n = self.n();
        let k: Vec<f64> = (0..n).map(|v| self.strength(v)).collect();
        let two_m: f64 = k.iter().sum();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = k.clone();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &v in order {
                let own = comm[v];
                for &(u, w) in &self.adj[v] {
                    let c = comm[u];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[own] -= k[v];
                let gain = |c: usize, link_c: f64| link_c - tot[c] * k[v] / two_m;
                let mut best = own;
                let mut best_gain = gain(own, link[own]);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain + MIN_GAIN {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[v];
                if best != own {
                    comm[v] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, comm: &[usize], k: usize) -> Level {
        let mut self_weight = vec![0.0; k];
        let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for v in 0..self.n() {
            let cv = comm[v];
            self_weight[cv] += self.self_weight[v];
            for &(u, w) in &self.adj[v] {
                let cu = comm[u];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_weight[cv] += w / 2.0;
                } else {
                    *maps[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_weight,
        }
    }
}

fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
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

/// Newman modularity of a labeling.
pub fn modularity(graph: &Graph, labels: &[usize]) -> f64 {
    let two_m = 2.0 * graph.edge_count() as f64;
    if two_m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; k];
    let mut tot = vec![0.0; k];
    for v in 0..graph.n() {
        tot[labels[v]] += graph.degree(v) as f64;
        for &u in graph.neighbors(v) {
            if labels[u] == labels[v] {
                inside[labels[v]] += 1.0;
            }
        }
    }
    (0..k).map(|c| inside[c] / two_m - (tot[c] / two_m).powi(2)).sum()
}

/// Louvain communities of `graph`.
pub fn louvain(graph: &Graph, options: LouvainOptions) -> Result<Partition> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut level = Level::from_graph(graph);
    let mut labels: Vec<usize> = (0..graph.n()).collect();
    let mut level_modularity = Vec::new();
    let mut depth = 0u64;
    loop {
        let mut order: Vec<usize> = (0..level.n()).collect();
        if let Some(seed) = options.shuffle_seed {
            order.shuffle(&mut rng::chacha(seed, stream::SHUFFLE, depth));
        }
        let (comm, moved) = level.local_moving(&order);
        if !moved {
            break;
        }
        let (comm, k) = renumber(&comm);
        for l in labels.iter_mut() {
            *l = comm[*l];
        }
        let q = modularity(graph, &labels);
        if let Some(&prev) = level_modularity.last() {
            if q <= prev + MIN_GAIN {
                break;
            }
        }
        level_modularity.push(q);
        level = level.aggregate(&comm, k);
        depth += 1;
    }
    let (labels, k) = renumber(&labels);
    let modularity = modularity(graph, &labels);
    if level_modularity.is_empty() {
        level_modularity.push(modularity);
    }
    Ok(Partition {
        labels,
        k,
        modularity,
        level_modularity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_graph::{sample_graph, Kernel, SampleSpec};

    fn two_cliques(size: usize) -> Graph {
        let edges = (0..2).flat_map(|c| {
            (0..size).flat_map(move |a| (a + 1..size).map(move |b| (c * size + a, c * size + b)))
        });
        Graph::from_edges(2 * size, edges).unwrap()
    }

    #[test]
    fn disjoint_cliques() {
        let p = louvain(&two_cliques(10), LouvainOptions::default()).unwrap();
        assert_eq!(p.k, 2);
        assert!(p.labels[..10].iter().all(|&l| l == 0));
        assert!(p.labels[10..].iter().all(|&l| l == 1));
        assert!((p.modularity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_is_one_block() {
        let p = louvain(&Graph::complete(20), LouvainOptions::default()).unwrap();
        assert_eq!(p.k, 1);
    }

    #[test]
    fn planted_partition_recovery() {
        let kernel = Kernel::equal_blocks(vec![
            vec![0.3, 0.02, 0.02],
            vec![0.02, 0.3, 0.02],
            vec![0.02, 0.02, 0.3],
        ])
        .unwrap();
        let spec = SampleSpec::new(300, 1.0, 9).with_latent(crate::random_graph::LatentMode::Grid);
        let (g, lat) = sample_graph(&kernel, &spec).unwrap();
        let p = louvain(&g, LouvainOptions::default()).unwrap();
        // majority label per true block, then agreement
        let mut agree = 0;
        for b in 0..3 {
            let mut counts = vec![0; p.k];
            for v in 0..300 {
                if lat.block[v] == b {
                    counts[p.labels[v]] += 1;
                }
            }
            agree += counts.iter().max().unwrap();
        }
        assert!(agree as f64 >= 0.95 * 300.0, "agreement {agree}");
    }

    #[test]
    fn modularity_is_non_decreasing_and_seeded() {
        let kernel = Kernel::equal_blocks(vec![vec![0.2, 0.03], vec![0.03, 0.2]]).unwrap();
        let (g, _) = sample_graph(&kernel, &SampleSpec::new(200, 1.0, 4)).unwrap();
        let opts = LouvainOptions { shuffle_seed: Some(3) };
        let p = louvain(&g, opts).unwrap();
        assert!(p.level_modularity.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(p, louvain(&g, opts).unwrap());
        assert!((p.modularity - modularity(&g, &p.labels)).abs() < 1e-12);
    }
}
