//! Parametric bootstrap of per-block density moments, standardization of
//! per-vertex densities, and the bootstrap critical value of the max
//! statistic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blockfit::BlockFit;
use crate::census::{census, DensityMatrix};
use crate::error::{Error, Result};
use crate::motif::RootedMotif;
use crate::random_graph::{sample_with_blocks, Kernel};
use crate::rng::{self, stream};
use crate::stats;

/// Eigenvalue ratio below which a covariance is treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// A block model to simulate from, with vertex blocks laid out on the grid
/// `x_i = i / (n + 1)`: the first `|P_0|` vertices in block 0, and so on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapModel {
    pub kernel: Kernel,
    pub rho: f64,
    pub blocks: Vec<usize>,
}

impl BootstrapModel {
    pub fn from_fit(fit: &BlockFit) -> Result<Self> {
        Ok(BootstrapModel {
            kernel: fit.kernel()?,
            rho: 1.0,
            blocks: fit.grid_blocks(),
        })
    }

    pub fn from_kernel(kernel: &Kernel, n: usize, rho: f64) -> Self {
        let blocks = (1..=n).map(|i| kernel.block_of(i as f64 / (n + 1) as f64)).collect();
        BootstrapModel {
            kernel: kernel.clone(),
            rho,
            blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn k(&self) -> usize {
        self.kernel.k()
    }

    fn replicate(&self, motifs: &[RootedMotif], seed: u64, stream_id: u64, t: u64) -> Result<DensityMatrix> {
        let s = rng::derive_seed(seed, stream_id, t);
        let g = sample_with_blocks(&self.kernel, self.rho, s, &self.blocks);
        census(&g, motifs)
    }
}

/// Per-block means and covariances of rooted densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMoments {
    pub motifs: Vec<RootedMotif>,
    pub replicates: usize,
    /// `means[b][t]`.
    pub means: Vec<Vec<f64>>,
    /// `covariances[b]` is `d x d`.
    pub covariances: Vec<Vec<Vec<f64>>>,
    /// Blocks that had at least one vertex.
    pub present: Vec<bool>,
}

/// Estimate `s_hat_b` and `Sigma_hat_b` from `replicates` graphs of `model`.
///
/// `s_hat_b` is the average over replicates of the block mean, and
/// `Sigma_hat_b = 1/(N-1) sum_t (1/|P_b|) sum_{i in P_b} (s_i^t - s_hat_b)(s_i^t - s_hat_b)'`.
pub fn bootstrap_moments(
    model: &BootstrapModel,
    motifs: &[RootedMotif],
    replicates: usize,
    seed: u64,
) -> Result<BootstrapMoments> {
    if replicates < 2 {
        return Err(Error::InvalidInput("at least two bootstrap replicates are required".into()));
    }
    let d = motifs.len();
    let k = model.k();
    let mut sizes = vec![0usize; k];
    for &b in &model.blocks {
        sizes[b] += 1;
    }
    let present: Vec<bool> = sizes.iter().map(|&s| s > 0).collect();
    for (b, &p) in present.iter().enumerate() {
        if !p {
            log::warn!("bootstrap: block {b} has no vertices and is excluded");
        }
    }
    let reps: Vec<DensityMatrix> = (0..replicates as u64)
        .into_par_iter()
        .map(|t| model.replicate(motifs, seed, stream::REPLICATES, t))
        .collect::<Result<_>>()?;

    let mut means = vec![vec![0.0; d]; k];
    for dm in &reps {
        for (v, &b) in model.blocks.iter().enumerate() {
            for t in 0..d {
                means[b][t] += dm.value(v, t) / sizes[b] as f64;
            }
        }
    }
    for (b, row) in means.iter_mut().enumerate() {
        for x in row.iter_mut() {
            *x = if present[b] { *x / replicates as f64 } else { f64::NAN };
        }
    }
    let mut covariances = vec![vec![vec![0.0; d]; d]; k];
    for dm in &reps {
        for (v, &b) in model.blocks.iter().enumerate() {
            let row = dm.row(v);
            for t in 0..d {
                for u in 0..d {
                    covariances[b][t][u] += (row[t] - means[b][t]) * (row[u] - means[b][u]) / sizes[b] as f64;
                }
            }
        }
    }
    for (b, cov) in covariances.iter_mut().enumerate() {
        for x in cov.iter_mut().flatten() {
            *x = if present[b] { *x / (replicates - 1) as f64 } else { f64::NAN };
        }
    }
    Ok(BootstrapMoments {
        motifs: motifs.to_vec(),
        replicates,
        means,
        covariances,
        present,
    })
}

/// Symmetric inverse square root `V diag(1/sqrt(lambda)) V'`.
pub fn inverse_sqrt(cov: &[Vec<f64>], block: usize) -> Result<DMatrix<f64>> {
    let d = cov.len();
    let m = DMatrix::from_fn(d, d, |r, c| cov[r][c]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance { block, ratio: f64::NAN });
    }
    let eig = SymmetricEigen::new(m);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(max > 0.0) || ratio < SINGULAR_RATIO {
        return Err(Error::SingularCovariance { block, ratio });
    }
    let inv = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
}

/// Precomputed per-block standardizers.
#[derive(Clone, Debug)]
pub struct Standardizer {
    means: Vec<DVector<f64>>,
    roots: Vec<Option<DMatrix<f64>>>,
}

impl Standardizer {
    /// Inverse square roots for the blocks in `needed` (all present blocks
    /// when `None`).
    pub fn new(moments: &BootstrapMoments, needed: Option<&[usize]>) -> Result<Self> {
        let k = moments.means.len();
        let mut want = vec![needed.is_none(); k];
        if let Some(bs) = needed {
            for &b in bs {
                if b >= k {
                    return Err(Error::InvalidInput(format!("block {b} out of range")));
                }
                want[b] = true;
            }
        }
        let mut roots = Vec::with_capacity(k);
        for b in 0..k {
            if want[b] && !moments.present[b] {
                return Err(Error::InvalidInput(format!("block {b} has no bootstrap moments")));
            }
            roots.push(if want[b] && moments.present[b] {
                Some(inverse_sqrt(&moments.covariances[b], b)?)
            } else {
                None
            });
        }
        Ok(Standardizer {
            means: moments.means.iter().map(|m| DVector::from_vec(m.clone())).collect(),
            roots,
        })
    }

    /// `Sigma_hat_b^{-1/2} (s - s_hat_b)`.
    pub fn apply(&self, s: &[f64], block: usize) -> Vec<f64> {
        let root = self.roots[block].as_ref().expect("standardizer prepared for block");
        let diff = DVector::from_column_slice(s) - &self.means[block];
        (root * diff).iter().copied().collect()
    }
}

/// `t_hat_i` for every vertex, with `assignment[i]` the block of vertex `i`.
pub fn standardize(densities: &DensityMatrix, moments: &BootstrapMoments, assignment: &[usize]) -> Result<Vec<Vec<f64>>> {
    if assignment.len() != densities.n {
        return Err(Error::InvalidInput("assignment length differs from graph order".into()));
    }
    if densities.dim() != moments.motifs.len() {
        return Err(Error::InvalidInput("density and moment dimensions differ".into()));
    }
    let mut blocks: Vec<usize> = assignment.to_vec();
    blocks.sort_unstable();
    blocks.dedup();
    let st = Standardizer::new(moments, Some(&blocks))?;
    Ok((0..densities.n).map(|v| st.apply(densities.row(v), assignment[v])).collect())
}

pub fn squared_norm(t: &[f64]) -> f64 {
    t.iter().map(|x| x * x).sum()
}

/// How replicate statistics are turned into a critical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalRule {
    /// Quantile of the per-replicate maxima over vertices.
    #[default]
    PerReplicateMax,
    /// Quantile of all vertex statistics of all replicates pooled.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    pub rule: CriticalRule,
    pub alpha: f64,
    pub replicates: usize,
    /// `max_i ||t_hat_i||^2` for each replicate.
    pub replicate_max: Vec<f64>,
}

/// Bootstrap critical value at level `alpha` from `replicates` simulated
/// graphs standardized with `moments`. The quantile is the order statistic
/// of rank `ceil((1 - alpha) R)`.
pub fn critical_value(
    model: &BootstrapModel,
    moments: &BootstrapMoments,
    alpha: f64,
    replicates: usize,
    seed: u64,
    rule: CriticalRule,
) -> Result<CriticalValue> {
    if !(0.0..1.0).contains(&alpha) || replicates == 0 {
        return Err(Error::InvalidInput("alpha must be in [0, 1) and replicates positive".into()));
    }
    let st = Standardizer::new(moments, None)?;
    let stats_per_rep: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let dm = model.replicate(&moments.motifs, seed, stream::REPLICATES + 100, r)?;
            Ok((0..dm.n)
                .map(|v| squared_norm(&st.apply(dm.row(v), model.blocks[v])))
                .collect())
        })
        .collect::<Result<_>>()?;
    let replicate_max: Vec<f64> = stats_per_rep
        .iter()
        .map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let value = match rule {
        CriticalRule::PerReplicateMax => stats::order_statistic_quantile(&replicate_max, 1.0 - alpha)?,
        CriticalRule::Pooled => {
            let all: Vec<f64> = stats_per_rep.into_iter().flatten().collect();
            stats::order_statistic_quantile(&all, 1.0 - alpha)?
        }
    };
    Ok(CriticalValue {
        value,
        rule,
        alpha,
        replicates,
        replicate_max,
    })
}

/// Bonferroni critical value: the `chi^2(d)` quantile at `1 - alpha / n`.
pub fn bonferroni_critical_value(d: usize, n: usize, alpha: f64) -> f64 {
    stats::chi2_quantile(d as f64, 1.0 - alpha / n as f64)
}
