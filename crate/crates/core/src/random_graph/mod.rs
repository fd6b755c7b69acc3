//! Inhomogeneous random graphs with piecewise-constant (block) kernels.
//!
//! A pair `{i, j}` is an edge with probability `rho * B[b(i)][b(j)]`, where
//! `b(i)` is the block containing the latent position `x_i`. The coin for a
//! pair is a hash of `(seed, i, j)`, so any subset of pairs can be sampled on
//! its own and still agrees with the full graph.

mod theory;

pub use theory::{
    average_clt_covariance, average_projection_covariance, count_moments, density_limits, expected_count,
    projection_terms, standardized_moment_target, theoretical_density, variance_count, CountMoments,
    ProjectionTerms, MAX_ASSIGNMENTS,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, stream};

/// Symmetric block kernel with proportions `pi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kernel {
    k: usize,
    /// Row-major `k x k`.
    #[serde(rename = "B")]
    b: Vec<f64>,
    pi: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
struct KernelRepr {
    k: Option<usize>,
    #[serde(rename = "B")]
    b: MatrixRepr,
    pi: Option<Vec<f64>>,
}

impl<'de> Deserialize<'de> for Kernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = KernelRepr::deserialize(d)?;
        let flat = match repr.b {
            MatrixRepr::Flat(v) => v,
            MatrixRepr::Nested(rows) => rows.into_iter().flatten().collect(),
        };
        let k = match repr.k {
            Some(k) => k,
            None => (flat.len() as f64).sqrt().round() as usize,
        };
        let pi = repr.pi.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        Kernel::from_flat(k, flat, pi).map_err(serde::de::Error::custom)
    }
}

impl Kernel {
    pub fn new(b: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let k = b.len();
        if b.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidKernel("B must be square".into()));
        }
        Self::from_flat(k, b.into_iter().flatten().collect(), pi)
    }

    /// Kernel from a row-major matrix.
    pub fn from_flat(k: usize, b: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidKernel("at least one block is required".into()));
        }
        if b.len() != k * k {
            return Err(Error::InvalidKernel(format!(
                "B has {} entries, expected {}",
                b.len(),
                k * k
            )));
        }
        if pi.len() != k {
            return Err(Error::InvalidKernel(format!("pi has {} entries, expected {k}", pi.len())));
        }
        for r in 0..k {
            for c in 0..k {
                let v = b[r * k + c];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidKernel(format!("B[{r}][{c}] = {v} is outside [0, 1]")));
                }
                if (v - b[c * k + r]).abs() > 1e-12 {
                    return Err(Error::InvalidKernel(format!("B is not symmetric at ({r}, {c})")));
                }
            }
            if b[r * k..(r + 1) * k].iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidKernel(format!("row {r} of B is zero")));
            }
        }
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidKernel("block proportions must be positive".into()));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidKernel(format!("block proportions sum to {total}")));
        }
        Ok(Kernel { k, b, pi })
    }

    /// The constant kernel `kappa = c`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::from_flat(1, vec![c], vec![1.0])
    }

    /// `k` equal blocks.
    pub fn equal_blocks(b: Vec<Vec<f64>>) -> Result<Self> {
        let k = b.len();
        Self::new(b, vec![1.0 / k as f64; k])
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn b(&self, r: usize, c: usize) -> f64 {
        self.b[r * self.k + c]
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.b.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn max_entry(&self) -> f64 {
        self.b.iter().copied().fold(0.0, f64::max)
    }

    /// `kappa_bar = pi' B pi`, the mean of the kernel.
    pub fn mean(&self) -> f64 {
        (0..self.k)
            .map(|r| (0..self.k).map(|c| self.pi[r] * self.pi[c] * self.b(r, c)).sum::<f64>())
            .sum()
    }

    /// Block containing latent position `x`; blocks partition `[0, 1]` into
    /// consecutive intervals of lengths `pi`.
    pub fn block_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (b, &p) in self.pi.iter().enumerate() {
            acc += p;
            if x < acc {
                return b;
            }
        }
        self.k - 1
    }

    /// Midpoint of block `b`'s interval, a representative latent position.
    pub fn block_midpoint(&self, b: usize) -> f64 {
        let start: f64 = self.pi[..b].iter().sum();
        start + self.pi[b] / 2.0
    }
}

/// How latent positions are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatentMode {
    /// i.i.d. uniform on `[0, 1]`.
    Uniform,
    /// `x_i = i / (n + 1)` with 1-based `i`.
    Grid,
    /// Given positions.
    Fixed(Vec<f64>),
}

/// Parameters of one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub latent: LatentMode,
    /// Overrides the latent of vertex 0.
    #[serde(default)]
    pub root_latent: Option<f64>,
}

impl SampleSpec {
    pub fn new(n: usize, rho: f64, seed: u64) -> Self {
        SampleSpec {
            n,
            rho,
            seed,
            latent: LatentMode::Uniform,
            root_latent: None,
        }
    }

    pub fn with_latent(mut self, latent: LatentMode) -> Self {
        self.latent = latent;
        self
    }

    pub fn with_root_latent(mut self, x: f64) -> Self {
        self.root_latent = Some(x);
        self
    }

    fn validate(&self, kernel: &Kernel) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!("rho = {} is outside [0, 1]", self.rho)));
        }
        if self.rho * kernel.max_entry() > 1.0 + 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "rho * max(B) = {} exceeds 1",
                self.rho * kernel.max_entry()
            )));
        }
        if let LatentMode::Fixed(x) = &self.latent {
            if x.len() != self.n {
                return Err(Error::InvalidSpec(format!(
                    "{} fixed latents for n = {}",
                    x.len(),
                    self.n
                )));
            }
            if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidSpec("latent positions must lie in [0, 1]".into()));
            }
        }
        if let Some(x) = self.root_latent {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidSpec("root latent must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Latent positions and the blocks they fall in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatentAssignment {
    pub x: Vec<f64>,
    pub block: Vec<usize>,
}

/// Draw latent positions for `spec`.
pub fn latents(kernel: &Kernel, spec: &SampleSpec) -> Result<LatentAssignment> {
    spec.validate(kernel)?;
    let n = spec.n;
    let mut x: Vec<f64> = match &spec.latent {
        LatentMode::Uniform => {
            let mut rng = rng::chacha(spec.seed, stream::LATENTS, 0);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
        LatentMode::Grid => (1..=n).map(|i| i as f64 / (n + 1) as f64).collect(),
        LatentMode::Fixed(v) => v.clone(),
    };
    if let (Some(x0), true) = (spec.root_latent, n > 0) {
        x[0] = x0;
    }
    let block = x.iter().map(|&v| kernel.block_of(v)).collect();
    Ok(LatentAssignment { x, block })
}

#[inline]
fn edge_coin(seed: u64, i: usize, j: usize, p: f64) -> bool {
    p > 0.0 && rng::pair_uniform(seed, stream::EDGES, i, j) < p
}

/// Sample `G(rho, kappa)`. Each pair is decided by its own hashed coin, so the
/// result does not depend on thread count or iteration order.
pub fn sample_graph(kernel: &Kernel, spec: &SampleSpec) -> Result<(Graph, LatentAssignment)> {
    let lat = latents(kernel, spec)?;
    let graph = sample_with_blocks(kernel, spec.rho, spec.seed, &lat.block);
    Ok((graph, lat))
}

/// Sample edges given block labels.
pub fn sample_with_blocks(kernel: &Kernel, rho: f64, seed: u64, block: &[usize]) -> Graph {
    let n = block.len();
    let probs: Vec<f64> = (0..kernel.k * kernel.k).map(|t| rho * kernel.b[t]).collect();
    let k = kernel.k;
    let lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &probs[block[i] * k..(block[i] + 1) * k];
            (i + 1..n)
                .filter(|&j| edge_coin(seed, i, j, row[block[j]]))
                .collect()
        })
        .collect();
    Graph::from_lists(lists)
}

/// The part of the sample that touches the closed neighborhood of `root`:
/// every edge of the full sample with an endpoint in `N[root]`, and nothing
/// else. Rooted counts at `root` of motifs whose edges all meet the root's
/// closed neighborhood equal those on the full sample.
pub fn sample_local(kernel: &Kernel, spec: &SampleSpec, root: usize) -> Result<(Graph, LatentAssignment)> {
    let lat = latents(kernel, spec)?;
    if root >= spec.n {
        return Err(Error::InvalidSpec(format!("root {root} out of range")));
    }
    let n = spec.n;
    let k = kernel.k;
    let p = |a: usize, b: usize| spec.rho * kernel.b[lat.block[a] * k + lat.block[b]];
    let nbrs: Vec<usize> = (0..n)
        .filter(|&j| j != root && edge_coin(spec.seed, root, j, p(root, j)))
        .collect();
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    lists[root] = nbrs.clone();
    let found: Vec<(usize, Vec<usize>)> = nbrs
        .par_iter()
        .map(|&u| {
            let adj = (0..n)
                .filter(|&j| j != u && j != root && edge_coin(spec.seed, u, j, p(u, j)))
                .collect();
            (u, adj)
        })
        .collect();
    for (u, adj) in found {
        lists[u].extend(adj);
    }
    Ok((Graph::from_lists(lists), lat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::rooted_count;
    use crate::motif::catalog;

    fn two_block() -> Kernel {
        Kernel::equal_blocks(vec![vec![0.8, 0.2], vec![0.2, 0.5]]).unwrap()
    }

    #[test]
    fn zero_rho_gives_empty_graph() {
        let (g, _) = sample_graph(&Kernel::constant(1.0).unwrap(), &SampleSpec::new(30, 0.0, 1)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn full_kernel_gives_complete_graph() {
        let (g, _) = sample_graph(&Kernel::constant(1.0).unwrap(), &SampleSpec::new(12, 1.0, 1)).unwrap();
        assert_eq!(g, Graph::complete(12));
    }

    #[test]
    fn rejects_invalid_kernels_and_specs() {
        assert!(Kernel::new(vec![vec![0.5, 0.1], vec![0.2, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(Kernel::new(vec![vec![1.5]], vec![1.0]).is_err());
        assert!(Kernel::new(vec![vec![0.5, 0.1], vec![0.1, 0.5]], vec![0.6, 0.6]).is_err());
        assert!(Kernel::new(vec![vec![0.0, 0.0], vec![0.0, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(sample_graph(&Kernel::constant(0.5).unwrap(), &SampleSpec::new(5, 3.0, 1)).is_err());
    }

    #[test]
    fn kernel_json_forms() {
        let flat: Kernel = serde_json::from_str(r#"{"k":2,"B":[0.8,0.2,0.2,0.5],"pi":[0.5,0.5]}"#).unwrap();
        let nested: Kernel = serde_json::from_str(r#"{"B":[[0.8,0.2],[0.2,0.5]]}"#).unwrap();
        assert_eq!(flat, two_block());
        assert_eq!(nested, two_block());
        let back: Kernel = serde_json::from_str(&serde_json::to_string(&flat).unwrap()).unwrap();
        assert_eq!(back, flat);
    }

    #[test]
    fn block_partition() {
        let k = Kernel::new(vec![vec![1.0; 3]; 3], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(k.block_of(0.0), 0);
        assert_eq!(k.block_of(0.19), 0);
        assert_eq!(k.block_of(0.2), 1);
        assert_eq!(k.block_of(0.6), 2);
        assert_eq!(k.block_of(1.0), 2);
    }

    #[test]
    fn seed_determinism() {
        let spec = SampleSpec::new(150, 0.3, 42);
        let a = sample_graph(&two_block(), &spec).unwrap();
        let b = sample_graph(&two_block(), &spec).unwrap();
        assert_eq!(a, b);
        let c = sample_graph(&two_block(), &SampleSpec::new(150, 0.3, 43)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn grid_latents() {
        let spec = SampleSpec::new(4, 0.5, 0).with_latent(LatentMode::Grid);
        let lat = latents(&two_block(), &spec).unwrap();
        assert_eq!(lat.x, vec![0.2, 0.4, 0.6, 0.8]);
        assert_eq!(lat.block, vec![0, 0, 1, 1]);
    }

    #[test]
    fn local_sample_agrees_at_root() {
        for seed in 0..5 {
            let spec = SampleSpec::new(120, 0.4, seed).with_root_latent(0.1);
            let (full, _) = sample_graph(&two_block(), &spec).unwrap();
            let (local, _) = sample_local(&two_block(), &spec, 0).unwrap();
            for m in [catalog::edge(), catalog::cherry(), catalog::triangle(), catalog::square(), catalog::diamond()] {
                assert!(m.is_within_closed_neighborhood());
                assert_eq!(rooted_count(&full, 0, &m).unwrap(), rooted_count(&local, 0, &m).unwrap());
            }
            for (a, b) in local.edges() {
                assert!(full.has_edge(a, b));
            }
        }
    }
}
