//! Monte Carlo checks of the per-vertex and averaged limit theorems for
//! rooted densities.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::{census, count_at};
use crate::error::{Error, Result};
use crate::inference::bootstrap::inverse_sqrt;
use crate::inference::{gof_test, triadic_closure, CriticalRule, GofConfig};
use crate::motif::RootedMotif;
use crate::random_graph::{
    average_clt_covariance, average_projection_covariance, count_moments, density_limits, projection_terms,
    sample_graph, sample_local, CountMoments, Kernel, SampleSpec,
};
use crate::rng::{self, stream};
use crate::stats::{self, KsResult, MomentEstimate};

/// `rho = n^(-a)`.
pub fn rho_from_exponent(n: usize, a: f64) -> f64 {
    (n as f64).powf(-a)
}

/// `n * rho^r` for a rational exponent given as a float.
fn regime(n: usize, rho: f64, exponent: f64) -> f64 {
    n as f64 * rho.powf(exponent)
}

fn ratio_f64(r: crate::motif::Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// How replicate graphs are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Pick `Local` when every motif only uses edges meeting the root's
    /// closed neighborhood, `Full` otherwise.
    Auto,
    Full,
    /// Only the edges meeting the root's closed neighborhood.
    Local,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCltConfig {
    pub kernel: Kernel,
    pub n: usize,
    pub rho: f64,
    pub replicates: usize,
    pub motifs: Vec<RootedMotif>,
    /// Latent position of the observed vertex (vertex 0).
    pub root_latent: f64,
    pub seed: u64,
    pub sampler: Sampler,
}

#[derive(Clone, Debug, Serialize)]
pub struct MotifMoments {
    pub motif: String,
    pub m: f64,
    /// `n rho^m`.
    pub regime: f64,
    pub mean: f64,
    pub variance: f64,
    /// Raw moments of the standardized count, orders 1 to 6.
    pub moments: Vec<MomentEstimate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub rho: f64,
    pub replicates: usize,
    pub root_block: usize,
    pub supercritical: bool,
    pub sampler: Sampler,
    pub motifs: Vec<MotifMoments>,
    pub exact: CountMoments,
    /// `||t_1||^2` per replicate.
    pub norms: Vec<f64>,
    /// `(chi^2(d) quantile, sorted norm)`.
    pub qq: Vec<(f64, f64)>,
    pub ks: KsResult,
}

/// Counts at vertex 0 over independent replicates with vertex 0's latent
/// fixed, standardized by the exact count moments. For these moments,
/// standardized counts coincide with densities normalised by `rho`.
pub fn vertex_clt_experiment(cfg: &VertexCltConfig) -> Result<MomentReport> {
    if cfg.replicates < 2 * stats::BATCHES {
        return Err(Error::InvalidInput(format!(
            "at least {} replicates are needed for batch standard errors",
            2 * stats::BATCHES
        )));
    }
    let d = cfg.motifs.len();
    let root_block = cfg.kernel.block_of(cfg.root_latent);
    let exact = count_moments(&cfg.kernel, &cfg.motifs, root_block, cfg.n, cfg.rho)?;
    let ms: Vec<f64> = cfg.motifs.iter().map(|m| ratio_f64(m.m_parameter())).collect();
    let regimes: Vec<f64> = ms.iter().map(|&m| regime(cfg.n, cfg.rho, m)).collect();
    let supercritical = regimes.iter().all(|&r| r > 1.0);
    if !supercritical {
        log::warn!("n rho^m <= 1 for some motif: counts are expected to degenerate at 0");
    }
    let local_ok = cfg.motifs.iter().all(|m| m.is_within_closed_neighborhood());
    let sampler = match cfg.sampler {
        Sampler::Auto if local_ok => Sampler::Local,
        Sampler::Auto => Sampler::Full,
        Sampler::Local if !local_ok => {
            return Err(Error::InvalidInput(
                "local sampling needs motifs within the root's closed neighborhood".into(),
            ))
        }
        s => s,
    };
    let counts: Vec<Vec<u64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let spec = SampleSpec::new(cfg.n, cfg.rho, rng::derive_seed(cfg.seed, stream::REPLICATES, r))
                .with_root_latent(cfg.root_latent);
            let g = match sampler {
                Sampler::Local => sample_local(&cfg.kernel, &spec, 0)?.0,
                _ => sample_graph(&cfg.kernel, &spec)?.0,
            };
            cfg.motifs.iter().map(|m| count_at(&g, 0, m)).collect()
        })
        .collect::<Result<_>>()?;

    let root = inverse_sqrt(&exact.covariance, root_block)?;
    let norms: Vec<f64> = counts
        .iter()
        .map(|c| {
            let diff = nalgebra::DVector::from_iterator(d, (0..d).map(|t| c[t] as f64 - exact.mean[t]));
            (&root * diff).norm_squared()
        })
        .collect();
    let motifs = (0..d)
        .map(|t| {
            let sd = exact.covariance[t][t].sqrt();
            let z: Vec<f64> = counts.iter().map(|c| (c[t] as f64 - exact.mean[t]) / sd).collect();
            MotifMoments {
                motif: cfg.motifs[t].to_string(),
                m: ms[t],
                regime: regimes[t],
                mean: exact.mean[t],
                variance: exact.covariance[t][t],
                moments: stats::standardized_moments(&z, 6),
            }
        })
        .collect();
    let chi = stats::chi2(d as f64);
    let ks = stats::ks_test(&norms, |x| statrs::distribution::ContinuousCDF::cdf(&chi, x));
    let qq = stats::qq_points(&norms, |p| stats::chi2_quantile(d as f64, p));
    Ok(MomentReport {
        n: cfg.n,
        rho: cfg.rho,
        replicates: cfg.replicates,
        root_block,
        supercritical,
        sampler,
        motifs,
        exact,
        norms,
        qq,
        ks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubcriticalConfig {
    pub kernel: Kernel,
    pub motif: RootedMotif,
    /// `rho = n^(-a)`.
    pub exponent: f64,
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub root_latent: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubcriticalRow {
    pub n: usize,
    pub rho: f64,
    /// `n rho^m`.
    pub regime: f64,
    pub expected_count: f64,
    pub positive_fraction: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubcriticalReport {
    pub motif: String,
    pub m: f64,
    pub rows: Vec<SubcriticalRow>,
    /// Positive-count frequencies strictly decrease along the schedule.
    pub decreasing: bool,
}

/// Frequency of a positive rooted count along a schedule of graph sizes.
pub fn subcritical_experiment(cfg: &SubcriticalConfig) -> Result<SubcriticalReport> {
    let m = ratio_f64(cfg.motif.m_parameter());
    let local_ok = cfg.motif.is_within_closed_neighborhood();
    let block = cfg.kernel.block_of(cfg.root_latent);
    let mut rows = Vec::new();
    for (step, &n) in cfg.ns.iter().enumerate() {
        let rho = rho_from_exponent(n, cfg.exponent);
        let positive: usize = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let seed = rng::hash_words(&[cfg.seed, stream::REPLICATES, step as u64, r]);
                let spec = SampleSpec::new(n, rho, seed).with_root_latent(cfg.root_latent);
                let g = if local_ok {
                    sample_local(&cfg.kernel, &spec, 0)?.0
                } else {
                    sample_graph(&cfg.kernel, &spec)?.0
                };
                Ok(usize::from(count_at(&g, 0, &cfg.motif)? > 0))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        let p = positive as f64 / cfg.replicates as f64;
        rows.push(SubcriticalRow {
            n,
            rho,
            regime: regime(n, rho, m),
            expected_count: crate::random_graph::expected_count(&cfg.kernel, &cfg.motif, block, n, rho)?,
            positive_fraction: p,
            se: (p * (1.0 - p) / cfg.replicates as f64).sqrt(),
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].positive_fraction < w[0].positive_fraction);
    Ok(SubcriticalReport {
        motif: cfg.motif.to_string(),
        m,
        rows,
        decreasing,
    })
}

/// The map `f(s, y)` averaged over vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `f(s, y) = s`.
    Identity,
    /// `f(s, y) = (s, s 1{y = 1})` for one motif, with `y ~ Bernoulli(q)`
    /// independent of the graph.
    LabelIndicator { q: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageCltConfig {
    pub kernel: Kernel,
    pub n: usize,
    pub rho: f64,
    pub replicates: usize,
    pub motifs: Vec<RootedMotif>,
    pub function: TestFunction,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageCltReport {
    pub n: usize,
    pub rho: f64,
    pub replicates: usize,
    pub gamma: Vec<f64>,
    /// `n rho^gamma` per motif.
    pub regime: Vec<f64>,
    /// `E f(s_x, y)` at the limit.
    pub reference: Vec<f64>,
    /// `Cov f(s_x, y)` over a random latent and label.
    pub exact_covariance: Vec<Vec<f64>>,
    /// Covariance of the first-order projection of the vertex average,
    /// which also collects the non-root positions of each motif.
    pub projection_covariance: Vec<Vec<f64>>,
    pub empirical_covariance: Vec<Vec<f64>>,
    /// `empirical / exact - 1` on the diagonal.
    pub relative_variance_error: Vec<f64>,
    /// `empirical / projection - 1` on the diagonal.
    pub projection_variance_error: Vec<f64>,
    /// KS test of each coordinate scaled by the `exact_covariance` diagonal
    /// against N(0, 1).
    pub ks: Vec<KsResult>,
    /// The same with the `projection_covariance` diagonal.
    pub projection_ks: Vec<KsResult>,
    /// `sqrt(n) (mean_i f - reference)` per replicate.
    pub scaled: Vec<Vec<f64>>,
    /// The limit covariance vanishes; normality is not assessed.
    pub degenerate: bool,
}

/// Covariance of the first-order projection of the vertex average of `f`.
fn function_projection(kernel: &Kernel, motifs: &[RootedMotif], f: TestFunction) -> Result<Vec<Vec<f64>>> {
    match f {
        TestFunction::Identity => average_projection_covariance(kernel, motifs),
        TestFunction::LabelIndicator { q } => {
            let t = projection_terms(kernel, &motifs[0])?;
            let r = t.order as f64;
            let mut cov = vec![vec![0.0; 2]; 2];
            for (b, p) in kernel.pi().iter().enumerate() {
                let g1 = t.identity(b);
                for (y, w) in [(0.0, 1.0 - q), (1.0, q)] {
                    let g2 = y * t.root[b] + q * t.others[b] - r * q * t.center + q * t.drift[b];
                    let g = [g1, g2];
                    for i in 0..2 {
                        for j in 0..2 {
                            cov[i][j] += p * w * g[i] * g[j];
                        }
                    }
                }
            }
            Ok(cov)
        }
    }
}

/// Exact reference mean and covariance of `f(s_x, y)` for a uniform latent.
fn function_moments(kernel: &Kernel, motifs: &[RootedMotif], f: TestFunction) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let limits = density_limits(kernel, motifs)?;
    let pi = kernel.pi();
    let d = motifs.len();
    let mu: Vec<f64> = (0..d).map(|t| limits.iter().zip(pi).map(|(v, p)| p * v[t]).sum()).collect();
    match f {
        TestFunction::Identity => Ok((mu, average_clt_covariance(kernel, motifs)?)),
        TestFunction::LabelIndicator { q } => {
            if d != 1 {
                return Err(Error::InvalidInput("the label test function takes one motif".into()));
            }
            let var = average_clt_covariance(kernel, motifs)?[0][0];
            let second = var + mu[0] * mu[0];
            Ok((
                vec![mu[0], q * mu[0]],
                vec![vec![var, q * var], vec![q * var, q * second - q * q * mu[0] * mu[0]]],
            ))
        }
    }
}

/// `sqrt(n)`-scaled vertex averages of `f(s_i, y_i)` against the exact
/// limiting covariance.
pub fn average_clt_experiment(cfg: &AverageCltConfig) -> Result<AverageCltReport> {
    let gamma: Vec<f64> = cfg
        .motifs
        .iter()
        .map(|m| m.gamma_parameter().map(ratio_f64))
        .collect::<Result<_>>()?;
    let regimes: Vec<f64> = gamma.iter().map(|&g| regime(cfg.n, cfg.rho, g)).collect();
    let (reference, exact) = function_moments(&cfg.kernel, &cfg.motifs, cfg.function)?;
    let projection = function_projection(&cfg.kernel, &cfg.motifs, cfg.function)?;
    let dim = reference.len();
    let degenerate = (0..dim).any(|t| exact[t][t] <= 1e-14 * (1.0 + reference[t].abs()));
    if degenerate {
        log::warn!("the limit covariance is degenerate; reporting the collapse only");
    }
    let sqrt_n = (cfg.n as f64).sqrt();
    let scaled: Vec<Vec<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let seed = rng::derive_seed(cfg.seed, stream::REPLICATES, r);
            let (g, _) = sample_graph(&cfg.kernel, &SampleSpec::new(cfg.n, cfg.rho, seed))?;
            let dm = census(&g, &cfg.motifs)?;
            let avg: Vec<f64> = match cfg.function {
                TestFunction::Identity => (0..dm.dim()).map(|t| stats::mean(&dm.column(t))).collect(),
                TestFunction::LabelIndicator { q } => {
                    let mut lab = rng::chacha(seed, stream::COVARIATES, 0);
                    let s = dm.column(0);
                    let sy: Vec<f64> = s.iter().map(|&v| if lab.gen::<f64>() < q { v } else { 0.0 }).collect();
                    vec![stats::mean(&s), stats::mean(&sy)]
                }
            };
            Ok(avg.iter().zip(&reference).map(|(a, m)| sqrt_n * (a - m)).collect())
        })
        .collect::<Result<_>>()?;
    let empirical = stats::covariance_matrix(&scaled);
    let relative_variance_error = (0..dim).map(|t| empirical[t][t] / exact[t][t] - 1.0).collect();
    let projection_variance_error = (0..dim).map(|t| empirical[t][t] / projection[t][t] - 1.0).collect();
    let ks_against = |cov: &Vec<Vec<f64>>| -> Vec<KsResult> {
        (0..dim)
            .map(|t| {
                let sd = cov[t][t].sqrt();
                let z: Vec<f64> = scaled.iter().map(|v| v[t] / sd).collect();
                stats::ks_test(&z, stats::normal_cdf)
            })
            .collect()
    };
    let ks = ks_against(&exact);
    let projection_ks = ks_against(&projection);
    Ok(AverageCltReport {
        n: cfg.n,
        rho: cfg.rho,
        replicates: cfg.replicates,
        gamma,
        regime: regimes,
        reference,
        exact_covariance: exact,
        projection_covariance: projection,
        empirical_covariance: empirical,
        relative_variance_error,
        projection_variance_error,
        ks,
        projection_ks,
        scaled,
        degenerate,
    })
}

/// Triadic-closure perturbation applied before testing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureSpec {
    pub vertex_fraction: f64,
    pub path_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GofExperimentConfig {
    pub kernel: Kernel,
    pub n: usize,
    pub rho: f64,
    /// Independent graphs, each run through the full pipeline.
    pub pipelines: usize,
    pub motifs: Vec<RootedMotif>,
    pub alpha: f64,
    pub moment_replicates: usize,
    pub critical_replicates: usize,
    pub rule: CriticalRule,
    pub closure: Option<ClosureSpec>,
    pub seed: u64,
}

impl GofExperimentConfig {
    /// Null graphs from `kernel` at `rho = n^(-1/3)` with the default test
    /// settings.
    pub fn new(kernel: Kernel, n: usize, pipelines: usize, seed: u64) -> Self {
        let defaults = GofConfig::new(seed);
        GofExperimentConfig {
            kernel,
            n,
            rho: rho_from_exponent(n, 1.0 / 3.0),
            pipelines,
            motifs: defaults.motifs,
            alpha: defaults.alpha,
            moment_replicates: defaults.moment_replicates,
            critical_replicates: defaults.critical_replicates,
            rule: defaults.rule,
            closure: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GofPipeline {
    pub fitted_k: usize,
    pub added_edges: usize,
    pub max_stat: f64,
    pub critical_value: f64,
    pub bonferroni_critical_value: f64,
    pub rejected: usize,
    pub rejected_bonferroni: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GofExperimentReport {
    pub pipelines: usize,
    /// Pipelines with at least one rejected vertex.
    pub rejections: usize,
    pub rejections_bonferroni: usize,
    pub rate: f64,
    pub rate_bonferroni: f64,
    /// 99% binomial band for the count of rejections at rate `alpha`.
    pub level_band: (u64, u64),
    pub runs: Vec<GofPipeline>,
}

/// Rejection frequency of the goodness-of-fit test over independent graphs,
/// optionally perturbed by triadic closure.
pub fn gof_experiment(cfg: &GofExperimentConfig) -> Result<GofExperimentReport> {
    let runs: Vec<GofPipeline> = (0..cfg.pipelines as u64)
        .into_par_iter()
        .map(|p| {
            let seed = rng::derive_seed(cfg.seed, stream::REPLICATES, p);
            let (mut g, _) = sample_graph(&cfg.kernel, &SampleSpec::new(cfg.n, cfg.rho, seed))?;
            let mut added_edges = 0;
            if let Some(c) = cfg.closure {
                let closed = triadic_closure(&g, c.vertex_fraction, c.path_fraction, seed)?;
                added_edges = closed.added_edges;
                g = closed.graph;
            }
            let test = GofConfig {
                motifs: cfg.motifs.clone(),
                alpha: cfg.alpha,
                moment_replicates: cfg.moment_replicates,
                critical_replicates: cfg.critical_replicates,
                rule: cfg.rule,
                seed: rng::hash_words(&[seed, stream::REPLICATES, 1]),
                louvain_seed: None,
            };
            let r = gof_test(&g, &test)?;
            Ok(GofPipeline {
                fitted_k: r.fit.k,
                added_edges,
                max_stat: r.stat.iter().copied().fold(0.0, f64::max),
                critical_value: r.critical_value,
                bonferroni_critical_value: r.bonferroni_critical_value,
                rejected: r.rejected.len(),
                rejected_bonferroni: r.rejected_bonferroni.len(),
            })
        })
        .collect::<Result<_>>()?;
    let rejections = runs.iter().filter(|r| r.rejected > 0).count();
    let rejections_bonferroni = runs.iter().filter(|r| r.rejected_bonferroni > 0).count();
    let total = cfg.pipelines.max(1) as f64;
    Ok(GofExperimentReport {
        pipelines: cfg.pipelines,
        rejections,
        rejections_bonferroni,
        rate: rejections as f64 / total,
        rate_bonferroni: rejections_bonferroni as f64 / total,
        level_band: stats::binomial_band(cfg.pipelines as u64, cfg.alpha, 0.99),
        runs,
    })
}
