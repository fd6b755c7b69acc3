//! Exact moments of rooted counts under block kernels.
//!
//! With the root's block fixed and every other latent i.i.d. from `pi`, a
//! labeled placement of `F` at the root is present with probability
//! `s_x(F) rho^e(F)`, so `E X_F = s_x(F) rho^e(F) X_F(K_n)` exactly. Second
//! moments follow from the overlap-set identity.

use serde::Serialize;

use super::Kernel;
use crate::error::{Error, Result};
use crate::motif::{falling_factorial, RootedMotif};
use crate::overlap::overlap_set;

/// Refuse block enumerations larger than this.
pub const MAX_ASSIGNMENTS: f64 = 1e8;

/// `s_x(F, kappa)` for a root in `root_block`: the sum over block assignments
/// of the non-root vertices of `prod pi_b * prod_{pq in F} B_{b_p b_q}`.
pub fn theoretical_density(kernel: &Kernel, motif: &RootedMotif, root_block: usize) -> Result<f64> {
    let k = kernel.k();
    if root_block >= k {
        return Err(Error::InvalidInput(format!("block {root_block} out of range")));
    }
    let n = motif.order();
    let assignments = (k as f64).powi(n as i32 - 1);
    if assignments > MAX_ASSIGNMENTS {
        return Err(Error::TooManyAssignments { assignments });
    }
    // earlier[v]: neighbors of v with a smaller index
    let earlier: Vec<Vec<usize>> = (0..n)
        .map(|v| (0..v).filter(|&u| motif.is_adjacent(u, v)).collect())
        .collect();
    let mut blocks = vec![0usize; n];
    blocks[0] = root_block;

    fn go(v: usize, weight: f64, blocks: &mut [usize], earlier: &[Vec<usize>], kernel: &Kernel) -> f64 {
        if v == blocks.len() {
            return weight;
        }
        let mut total = 0.0;
        for b in 0..kernel.k() {
            let mut w = weight * kernel.pi()[b];
            for &u in &earlier[v] {
                w *= kernel.b(blocks[u], b);
            }
            if w == 0.0 {
                continue;
            }
            blocks[v] = b;
            total += go(v + 1, w, blocks, earlier, kernel);
        }
        total
    }

    Ok(go(1, 1.0, &mut blocks, &earlier, kernel))
}

/// `E X_F(G, i)` for a root in `root_block`.
pub fn expected_count(kernel: &Kernel, motif: &RootedMotif, root_block: usize, n: usize, rho: f64) -> Result<f64> {
    let s = theoretical_density(kernel, motif, root_block)?;
    let complete = motif.count_in_complete(n)? as f64;
    Ok(s * rho.powi(motif.edge_count() as i32) * complete)
}

/// Leading-order variance: `sum c_H E X_H` over the overlap set of `(F, F)`
/// without the gluing product. The relative error is `O(rho)`, coming from
/// the dropped `E X_{F^2} - (E X_F)^2` term.
pub fn variance_count(kernel: &Kernel, motif: &RootedMotif, root_block: usize, n: usize, rho: f64) -> Result<f64> {
    let set = overlap_set(motif, motif)?;
    let mut total = 0.0;
    for e in set.overlapping() {
        total += e.coefficient as f64 * expected_count(kernel, &e.motif, root_block, n, rho)?;
    }
    Ok(total)
}

/// Exact mean vector and covariance matrix of rooted counts at one vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountMoments {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Exact `E X` and `Cov X` for counts of `motifs` at a root in `root_block`.
///
/// `Cov(X_1, X_2) = sum_{H != F1F2} c_H E X_H + (c_{F1F2} E X_{F1F2} - E X_1 E X_2)`.
/// The bracket is evaluated as `s_1 s_2 rho^(e1+e2) / (aut1 aut2)` times a
/// difference of falling factorials computed in integers.
pub fn count_moments(
    kernel: &Kernel,
    motifs: &[RootedMotif],
    root_block: usize,
    n: usize,
    rho: f64,
) -> Result<CountMoments> {
    let d = motifs.len();
    let s: Vec<f64> = motifs
        .iter()
        .map(|m| theoretical_density(kernel, m, root_block))
        .collect::<Result<_>>()?;
    let mean = motifs
        .iter()
        .map(|m| expected_count(kernel, m, root_block, n, rho))
        .collect::<Result<Vec<_>>>()?;
    let mut covariance = vec![vec![0.0; d]; d];
    for t in 0..d {
        for u in t..d {
            let (f1, f2) = (&motifs[t], &motifs[u]);
            let set = overlap_set(f1, f2)?;
            let mut c = 0.0;
            for e in set.overlapping() {
                c += e.coefficient as f64 * expected_count(kernel, &e.motif, root_block, n, rho)?;
            }
            let (a, b) = (f1.order(), f2.order());
            let m = n as u64 - 1;
            let ff = |k: usize| falling_factorial(m, k).map(|v| v as i128).ok_or(Error::Overflow);
            let joint = ff(a + b - 2)?;
            let separate = ff(a - 1)?.checked_mul(ff(b - 1)?).ok_or(Error::Overflow)?;
            let bracket = (joint - separate) as f64;
            let scale = s[t] * s[u] * rho.powi((f1.edge_count() + f2.edge_count()) as i32)
                / (f1.aut_count()? * f2.aut_count()?) as f64;
            c += scale * bracket;
            covariance[t][u] = c;
            covariance[u][t] = c;
        }
    }
    Ok(CountMoments { mean, covariance })
}

/// Per-block limits of rooted densities: `s_x(F, kappa) / kappa_bar^e(F)`.
/// The `kappa_bar` factor appears because densities are normalised by the
/// observed edge density, which tends to `rho * kappa_bar`.
pub fn density_limits(kernel: &Kernel, motifs: &[RootedMotif]) -> Result<Vec<Vec<f64>>> {
    let kb = kernel.mean();
    (0..kernel.k())
        .map(|b| {
            motifs
                .iter()
                .map(|m| Ok(theoretical_density(kernel, m, b)? / kb.powi(m.edge_count() as i32)))
                .collect()
        })
        .collect()
}

/// Covariance over a uniformly drawn latent of the density limits, the
/// asymptotic covariance of `sqrt(n)` times the averaged densities.
pub fn average_clt_covariance(kernel: &Kernel, motifs: &[RootedMotif]) -> Result<Vec<Vec<f64>>> {
    let limits = density_limits(kernel, motifs)?;
    let d = motifs.len();
    let pi = kernel.pi();
    let mean: Vec<f64> = (0..d)
        .map(|t| limits.iter().zip(pi).map(|(v, p)| p * v[t]).sum())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for (v, p) in limits.iter().zip(pi) {
        for t in 0..d {
            for u in 0..d {
                cov[t][u] += p * (v[t] - mean[t]) * (v[u] - mean[u]);
            }
        }
    }
    Ok(cov)
}

/// Per-block pieces of the first-order (Hoeffding) projection of the vertex
/// average of one motif's densities, all divided by `kappa_bar^e`.
///
/// The average is, to first order, a U-statistic of order `|F|` in the
/// latents divided by `kappa_bar_n^e`, so a vertex contributes through every
/// position of `F`, not only the root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionTerms {
    pub order: usize,
    /// Root position: `s_b(F) / kappa_bar^e`.
    pub root: Vec<f64>,
    /// Sum over the non-root positions `p` of `s_b(F rerooted at p)`.
    pub others: Vec<f64>,
    /// `E s_x(F) / kappa_bar^e`, the same for every position.
    pub center: f64,
    /// Linearisation of `kappa_bar_n^(-e)`: `-2 e center (d_b - kappa_bar) / kappa_bar`.
    pub drift: Vec<f64>,
}

impl ProjectionTerms {
    /// Projection of the plain average at a vertex of block `b`.
    pub fn identity(&self, b: usize) -> f64 {
        self.root[b] + self.others[b] - self.order as f64 * self.center + self.drift[b]
    }
}

pub fn projection_terms(kernel: &Kernel, motif: &RootedMotif) -> Result<ProjectionTerms> {
    let k = kernel.k();
    let kb = kernel.mean();
    let e = motif.edge_count() as i32;
    let scale = kb.powi(e);
    let edges = motif.edges();
    let rerooted: Vec<RootedMotif> = (1..motif.order())
        .map(|p| RootedMotif::new(motif.order(), p, &edges))
        .collect::<Result<_>>()?;
    let mut root = Vec::with_capacity(k);
    let mut others = Vec::with_capacity(k);
    for b in 0..k {
        root.push(theoretical_density(kernel, motif, b)? / scale);
        let mut o = 0.0;
        for m in &rerooted {
            o += theoretical_density(kernel, m, b)?;
        }
        others.push(o / scale);
    }
    let pi = kernel.pi();
    let center: f64 = root.iter().zip(pi).map(|(v, p)| v * p).sum();
    let drift = (0..k)
        .map(|b| {
            let d: f64 = (0..k).map(|c| pi[c] * kernel.b(b, c)).sum();
            -2.0 * e as f64 * center * (d - kb) / kb
        })
        .collect();
    Ok(ProjectionTerms {
        order: motif.order(),
        root,
        others,
        center,
        drift,
    })
}

/// Covariance of the first-order projections of the averaged densities:
/// the limiting covariance of `sqrt(n)` times the vertex averages.
pub fn average_projection_covariance(kernel: &Kernel, motifs: &[RootedMotif]) -> Result<Vec<Vec<f64>>> {
    let terms: Vec<ProjectionTerms> = motifs.iter().map(|m| projection_terms(kernel, m)).collect::<Result<_>>()?;
    let d = motifs.len();
    let mut cov = vec![vec![0.0; d]; d];
    for (b, p) in kernel.pi().iter().enumerate() {
        for t in 0..d {
            for u in 0..d {
                cov[t][u] += p * terms[t].identity(b) * terms[u].identity(b);
            }
        }
    }
    Ok(cov)
}

/// `k`-th moment of a standard normal: `(k-1)!!` for even `k`, 0 for odd.
pub fn standardized_moment_target(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|v| v as f64).product()
}
