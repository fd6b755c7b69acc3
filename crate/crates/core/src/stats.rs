//! Small statistical helpers for the Monte Carlo checks.

use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Unbiased sample covariance matrix of the rows of `rows`.
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows.first().map_or(0, |r| r.len());
    let n = rows.len() as f64;
    let mu: Vec<f64> = (0..d).map(|t| rows.iter().map(|r| r[t]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for t in 0..d {
            for u in 0..d {
                cov[t][u] += (r[t] - mu[t]) * (r[u] - mu[u]);
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= n - 1.0;
        }
    }
    cov
}

/// Standard error of the mean of `x` by non-overlapping batch means.
pub fn batch_means_se(x: &[f64], batches: usize) -> f64 {
    let size = x.len() / batches;
    if size == 0 || batches < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..batches).map(|b| mean(&x[b * size..(b + 1) * size])).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Number of batches used for Monte Carlo standard errors.
pub const BATCHES: usize = 20;

/// Sample moment `mean(z^k)` with a batch-means standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub value: f64,
    pub se: f64,
    pub target: f64,
}

impl MomentEstimate {
    /// `|value - target| / se`.
    pub fn deviation(&self) -> f64 {
        (self.value - self.target).abs() / self.se
    }

    pub fn within(&self, ses: f64) -> bool {
        self.deviation() <= ses
    }
}

/// Raw moments of an already standardized sample against normal targets.
pub fn standardized_moments(z: &[f64], max_order: u32) -> Vec<MomentEstimate> {
    (1..=max_order)
        .map(|k| {
            let powers: Vec<f64> = z.iter().map(|v| v.powi(k as i32)).collect();
            MomentEstimate {
                order: k,
                value: mean(&powers),
                se: batch_means_se(&powers, BATCHES),
                target: crate::random_graph::standardized_moment_target(k),
            }
        })
        .collect()
}

/// One-sample Kolmogorov-Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution tail `Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `sample` against the continuous `cdf`, with Stephens'
/// small-sample correction of the asymptotic p-value.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sq = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
    }
}

pub fn chi2(df: f64) -> ChiSquared {
    ChiSquared::new(df).expect("positive degrees of freedom")
}

pub fn chi2_quantile(df: f64, p: f64) -> f64 {
    chi2(df).inverse_cdf(p)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}

/// QQ pairs `(theoretical quantile, sorted sample value)` at plotting
/// positions `(i - 0.5) / n`.
pub fn qq_points(sample: &[f64], quantile: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len() as f64;
    x.into_iter()
        .enumerate()
        .map(|(i, v)| (quantile((i as f64 + 0.5) / n), v))
        .collect()
}

/// The `ceil(p * len)`-th smallest value (1-based), clamped to the sample.
pub fn order_statistic_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("quantile of an empty sample".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let rank = ((p * x.len() as f64).ceil() as usize).clamp(1, x.len());
    Ok(x[rank - 1])
}

/// Central acceptance band `[lo, hi]` for a Binomial(n, p) count: each tail
/// outside the band has probability at most `(1 - level) / 2`.
pub fn binomial_band(n: u64, p: f64, level: f64) -> (u64, u64) {
    let dist = Binomial::new(p, n).expect("valid binomial");
    let tail = (1.0 - level) / 2.0;
    let lo = (0..=n).find(|&k| dist.cdf(k) > tail).unwrap_or(0);
    let hi = (0..=n).find(|&k| dist.sf(k) <= tail).unwrap_or(n);
    (lo, hi)
}

/// `P(X <= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    Binomial::new(p, n).expect("valid binomial").cdf(k)
}
