use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use rootstat::experiments::{
    average_clt_experiment, gof_experiment, rho_from_exponent, subcritical_experiment, vertex_clt_experiment,
    AverageCltConfig, ClosureSpec, GofExperimentConfig, Sampler, SubcriticalConfig, TestFunction, VertexCltConfig,
};
use rootstat::fixtures::fig_c1_kernel;
use rootstat::graph::{load_edge_list, write_edge_list, LoadedGraph};
use rootstat::inference::{fit_blockmodel, gof_test, logistic_fit, CovariateTable, CriticalRule, FitOptions, GofConfig};
use rootstat::motif::catalog;
use rootstat::overlap::{inductive_coefficients, overlap_set, verify_product_identity_all};
use rootstat::random_graph::{
    count_moments, density_limits, sample_graph, theoretical_density, variance_count, Kernel, LatentMode, SampleSpec,
};
use rootstat::{census, Ratio, RootedMotif};

use crate::report::{write_to, Report, Sink};
use crate::{Cli, Command, Common, Latents, Preset, Rule};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    let sink = Sink {
        out: cli.common.out.clone(),
    };
    let common = &cli.common;
    match &cli.command {
        Command::Census(a) => {
            let g = load_graph(&a.graph.graph)?;
            let motifs = parse_motifs(&a.motifs)?;
            let dm = census(&g.graph, &motifs)?;
            sink.text(|w| {
                write!(w, "vertex")?;
                for m in &motifs {
                    write!(w, "\t{m}_count")?;
                }
                for m in &motifs {
                    write!(w, "\t{m}_density")?;
                }
                writeln!(w)?;
                for v in 0..dm.n {
                    write!(w, "{}", g.labels[v])?;
                    for c in &dm.counts {
                        write!(w, "\t{}", c.counts[v])?;
                    }
                    for s in dm.row(v) {
                        write!(w, "\t{s}")?;
                    }
                    writeln!(w)?;
                }
                Ok(())
            })?;
            sink.summary(format!(
                "{} vertices, {} edges, edge density {:.6}",
                dm.n, dm.edge_count, dm.rho_hat
            ));
        }
        Command::Overlap(a) => {
            let (f1, f2) = motif_pair(&a.motifs)?;
            let set = overlap_set(&f1, &f2)?;
            let agrees = inductive_coefficients(&f1, &f2)? == set;
            let entries: Vec<OverlapRow> = set
                .entries
                .iter()
                .map(|e| OverlapRow {
                    motif: catalog::name_of(&e.motif).map(String::from),
                    order: e.motif.order(),
                    edges: e.motif.edges(),
                    coefficient: e.coefficient,
                })
                .collect();
            for e in &entries {
                sink.summary(format!(
                    "{:<16} order {} edges {:>2}  c_H = {}",
                    e.motif.as_deref().unwrap_or("(unnamed)"),
                    e.order,
                    e.edges.len(),
                    e.coefficient
                ));
            }
            sink.summary(format!("inductive method agrees: {agrees}"));
            let result = OverlapResult {
                f1: f1.to_string(),
                f2: f2.to_string(),
                entries,
                inductive_agrees: agrees,
            };
            sink.report(&Report::new("overlap", None, a, result))?;
            if !agrees {
                return Err(rootstat::Error::Invariant("direct and inductive coefficients differ".into()).into());
            }
        }
        Command::VerifyIdentity(a) => {
            let g = load_graph(&a.graph.graph)?;
            let (f1, f2) = motif_pair(&a.motifs)?;
            let set = overlap_set(&f1, &f2)?;
            let checks = verify_product_identity_all(&g.graph, &set)?;
            let violations: Vec<String> = checks
                .iter()
                .filter(|c| !c.holds)
                .map(|c| g.labels[c.vertex].clone())
                .collect();
            sink.summary(format!(
                "{} x {}: identity checked at {} vertices, {} violations",
                f1,
                f2,
                checks.len(),
                violations.len()
            ));
            let result = IdentityResult {
                vertices: checks
                    .iter()
                    .map(|c| IdentityRow {
                        vertex: g.labels[c.vertex].clone(),
                        lhs: c.lhs.to_string(),
                        rhs: c.rhs.to_string(),
                        holds: c.holds,
                    })
                    .collect(),
                all_hold: violations.is_empty(),
                violations,
            };
            let failed = !result.all_hold;
            sink.report(&Report::new("verify-identity", None, a, result))?;
            if failed {
                return Err(rootstat::Error::Invariant("product identity violated".into()).into());
            }
        }
        Command::Simulate(a) => {
            let seed = resolve_seed(common);
            let kernel = load_kernel(a.kernel.kernel.as_deref())?;
            let rho = a.rho.unwrap_or_else(|| rho_from_exponent(a.n, 1.0 / 3.0));
            let latent = match a.latent {
                Latents::Uniform => LatentMode::Uniform,
                Latents::Grid => LatentMode::Grid,
            };
            let (g, _) = sample_graph(&kernel, &SampleSpec::new(a.n, rho, seed).with_latent(latent))?;
            sink.text(|w| write_edge_list(&g, w))?;
            sink.summary(format!(
                "sampled n = {}, rho = {rho:.6}, {} edges (seed {seed})",
                g.n(),
                g.edge_count()
            ));
        }
        Command::Moments(a) => {
            let kernel = load_kernel(a.kernel.kernel.as_deref())?;
            let motifs = parse_motifs(&a.motifs)?;
            if a.block >= kernel.k() {
                bail!("block {} out of range for a {}-block kernel", a.block, kernel.k());
            }
            let rho = a.rho.unwrap_or_else(|| rho_from_exponent(a.n, 1.0 / 3.0));
            let exact = count_moments(&kernel, &motifs, a.block, a.n, rho)?;
            let per_motif = motifs
                .iter()
                .map(|m| {
                    Ok(MotifTheory {
                        motif: m.to_string(),
                        m: ratio_string(m.m_parameter()),
                        gamma: m.gamma_parameter().ok().map(ratio_string),
                        density: theoretical_density(&kernel, m, a.block)?,
                        leading_variance: variance_count(&kernel, m, a.block, a.n, rho)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for (t, m) in per_motif.iter().enumerate() {
                sink.summary(format!(
                    "{:<10} E X = {:.4}  Var X = {:.4} (leading order {:.4})",
                    m.motif, exact.mean[t], exact.covariance[t][t], m.leading_variance
                ));
            }
            let result = MomentsResult {
                rho,
                motifs: per_motif,
                mean: exact.mean,
                covariance: exact.covariance,
                density_limits: density_limits(&kernel, &motifs)?,
            };
            sink.report(&Report::new("moments", None, a, result))?;
        }
        Command::Fit(a) => {
            let g = load_graph(&a.graph)?;
            let fit = fit_blockmodel(&g.graph, FitOptions::default())?;
            sink.summary(format!(
                "{} blocks, sizes {:?}, log-likelihood {:.3}, AIC {:.3}",
                fit.k, fit.sizes, fit.log_likelihood, fit.aic
            ));
            let result = FitResult {
                labels: g.labels.clone(),
                fit,
            };
            sink.report(&Report::new("fit", None, a, result))?;
        }
        Command::Gof(a) => {
            let seed = resolve_seed(common);
            let g = load_graph(&a.graph.graph)?;
            let config = GofConfig {
                motifs: parse_motifs(&a.motifs)?,
                alpha: a.alpha,
                moment_replicates: a.moment_replicates,
                critical_replicates: a.replicates,
                rule: critical_rule(a.rule),
                seed,
                louvain_seed: None,
            };
            let r = gof_test(&g.graph, &config)?;
            let rejected_labels: Vec<String> = r.rejected.iter().map(|&v| g.labels[v].clone()).collect();
            sink.summary(format!(
                "{} blocks; critical value {:.3} (Bonferroni {:.3}); {} vertices rejected at alpha = {}",
                r.fit.k,
                r.critical_value,
                r.bonferroni_critical_value,
                r.rejected.len(),
                a.alpha
            ));
            let result = GofOutput {
                rejected_labels,
                labels: g.labels.clone(),
                test: r,
            };
            sink.report(&Report::new("gof", Some(seed), a, result))?;
        }
        Command::Regress(a) => {
            let g = load_graph(&a.graph.graph)?;
            let motifs = parse_motifs(&a.motifs)?;
            let table = CovariateTable::read(
                File::open(&a.covariates).with_context(|| format!("cannot open {}", a.covariates.display()))?,
            )?;
            let (pairs, dropped) = table.align(&g.label_index());
            if dropped > 0 {
                log::warn!("{dropped} covariate rows name vertices absent from the graph");
            }
            let dm = census(&g.graph, &motifs)?;
            let mut names = vec!["intercept".to_string()];
            names.extend(motifs.iter().map(|m| m.to_string()));
            names.extend(table.extra_names.iter().cloned());
            let rows: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(v, r)| {
                    let mut row = vec![1.0];
                    row.extend_from_slice(dm.row(v));
                    row.extend_from_slice(&table.extra[r]);
                    row
                })
                .collect();
            let y: Vec<u8> = pairs.iter().map(|&(_, r)| table.label[r]).collect();
            let fit = logistic_fit(&rows, &y, &names, a.level)?;
            for (j, name) in fit.names.iter().enumerate() {
                sink.summary(format!(
                    "{:<12} {:>10.4} (se {:.4}, z {:+.2}, CI [{:.4}, {:.4}])",
                    name, fit.coefficients[j], fit.se[j], fit.z[j], fit.ci_lower[j], fit.ci_upper[j]
                ));
            }
            let result = RegressOutput {
                observations: rows.len(),
                dropped_rows: dropped,
                fit,
            };
            sink.report(&Report::new("regress", None, a, result))?;
        }
        Command::Validate(a) => {
            let seed = resolve_seed(common);
            validate(a, seed, &sink)?;
        }
    }
    Ok(())
}

fn validate(a: &crate::ValidateArgs, seed: u64, sink: &Sink) -> Result<()> {
    let kernel = fig_c1_kernel();
    match a.preset {
        Preset::FigC1Qq => {
            let n = a.n.unwrap_or(5000);
            let cfg = VertexCltConfig {
                kernel,
                n,
                rho: rho_from_exponent(n, 1.0 / 3.0),
                replicates: a.replicates.unwrap_or(200),
                motifs: vec![catalog::triangle(), catalog::square()],
                root_latent: 0.5,
                seed,
                sampler: Sampler::Auto,
            };
            let r = vertex_clt_experiment(&cfg)?;
            sink.summary(format!("KS against chi2(2): D = {:.4}, p = {:.4}", r.ks.statistic, r.ks.p_value));
            for m in &r.motifs {
                for e in &m.moments[1..4] {
                    sink.summary(format!(
                        "{:<9} moment {}: {:.3} (target {}, {:.1} SE)",
                        m.motif,
                        e.order,
                        e.value,
                        e.target,
                        e.deviation()
                    ));
                }
            }
            if let Some(path) = &a.table {
                write_qq(path, &r.qq)?;
            }
            sink.report(&Report::new("validate", Some(seed), a, r))
        }
        Preset::Level | Preset::Power => {
            let mut cfg = GofExperimentConfig::new(
                kernel,
                a.n.unwrap_or(200),
                a.replicates.unwrap_or(if a.preset == Preset::Level { 200 } else { 100 }),
                seed,
            );
            cfg.alpha = a.alpha;
            if a.preset == Preset::Power {
                cfg.closure = Some(ClosureSpec {
                    vertex_fraction: 0.05,
                    path_fraction: 0.05,
                });
            }
            let r = gof_experiment(&cfg)?;
            sink.summary(format!(
                "rejected {}/{} with the bootstrap critical value, {}/{} with Bonferroni; 99% band at alpha: {:?}",
                r.rejections, r.pipelines, r.rejections_bonferroni, r.pipelines, r.level_band
            ));
            sink.report(&Report::new("validate", Some(seed), a, r))
        }
        Preset::Subcritical => {
            let cfg = SubcriticalConfig {
                kernel: Kernel::constant(1.0)?,
                motif: catalog::triangle(),
                exponent: 0.8,
                ns: vec![500, 1000, 2000, 4000],
                replicates: a.replicates.unwrap_or(20_000),
                root_latent: 0.5,
                seed,
            };
            let r = subcritical_experiment(&cfg)?;
            for row in &r.rows {
                sink.summary(format!(
                    "n = {:>5}  n rho^m = {:.4}  P(X > 0) = {:.4} (se {:.4})",
                    row.n, row.regime, row.positive_fraction, row.se
                ));
            }
            sink.summary(format!("decreasing: {}", r.decreasing));
            sink.report(&Report::new("validate", Some(seed), a, r))
        }
        Preset::AvgClt => {
            let n = a.n.unwrap_or(4000);
            let cfg = AverageCltConfig {
                kernel,
                n,
                rho: rho_from_exponent(n, 1.0 / 3.0),
                replicates: a.replicates.unwrap_or(500),
                motifs: vec![catalog::triangle(), catalog::square()],
                function: TestFunction::Identity,
                seed,
            };
            let r = average_clt_experiment(&cfg)?;
            for (t, m) in cfg.motifs.iter().enumerate() {
                sink.summary(format!(
                    "{:<9} empirical var {:.4}; Cov f(s_x) {:.4}; projection {:.4}",
                    m.to_string(),
                    r.empirical_covariance[t][t],
                    r.exact_covariance[t][t],
                    r.projection_covariance[t][t]
                ));
            }
            sink.report(&Report::new("validate", Some(seed), a, r))
        }
    }
}

fn write_qq(path: &Path, qq: &[(f64, f64)]) -> Result<()> {
    write_to(path, |w| {
        writeln!(w, "theoretical\tempirical")?;
        for (t, e) in qq {
            writeln!(w, "{t}\t{e}")?;
        }
        Ok(())
    })
}

fn resolve_seed(common: &Common) -> u64 {
    match common.seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s}");
            s
        }
    }
}

fn critical_rule(r: Rule) -> CriticalRule {
    match r {
        Rule::PerReplicateMax => CriticalRule::PerReplicateMax,
        Rule::Pooled => CriticalRule::Pooled,
    }
}

fn ratio_string(r: Ratio) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let g = load_edge_list(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))?;
    if g.warnings.duplicate_edges > 0 || g.warnings.self_loops > 0 {
        log::warn!(
            "dropped {} duplicate edges and {} self-loops",
            g.warnings.duplicate_edges,
            g.warnings.self_loops
        );
    }
    Ok(g)
}

fn load_kernel(path: Option<&Path>) -> Result<Kernel> {
    match path {
        None => Ok(fig_c1_kernel()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot open {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid kernel in {}", p.display()))
        }
    }
}

fn parse_motifs(names: &[String]) -> Result<Vec<RootedMotif>> {
    if names.is_empty() {
        bail!("no motifs given");
    }
    names
        .iter()
        .map(|n| {
            catalog::by_name(n)
                .with_context(|| format!("unknown motif {n:?}; known: {}", catalog::NAMES.join(", ")))
        })
        .collect()
}

fn motif_pair(names: &[String]) -> Result<(RootedMotif, RootedMotif)> {
    let ms = parse_motifs(names)?;
    match <[RootedMotif; 2]>::try_from(ms) {
        Ok([a, b]) => Ok((a, b)),
        Err(_) => bail!("exactly two motifs are needed, e.g. --motifs triangle,cherry"),
    }
}

#[derive(Serialize)]
struct OverlapRow {
    motif: Option<String>,
    order: usize,
    edges: Vec<(usize, usize)>,
    coefficient: u64,
}

#[derive(Serialize)]
struct OverlapResult {
    f1: String,
    f2: String,
    entries: Vec<OverlapRow>,
    inductive_agrees: bool,
}

#[derive(Serialize)]
struct IdentityRow {
    vertex: String,
    lhs: String,
    rhs: String,
    holds: bool,
}

#[derive(Serialize)]
struct IdentityResult {
    all_hold: bool,
    violations: Vec<String>,
    vertices: Vec<IdentityRow>,
}

#[derive(Serialize)]
struct MotifTheory {
    motif: String,
    m: String,
    gamma: Option<String>,
    density: f64,
    leading_variance: f64,
}

#[derive(Serialize)]
struct MomentsResult {
    rho: f64,
    motifs: Vec<MotifTheory>,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    density_limits: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FitResult {
    labels: Vec<String>,
    fit: rootstat::inference::BlockFit,
}

#[derive(Serialize)]
struct GofOutput {
    rejected_labels: Vec<String>,
    labels: Vec<String>,
    test: rootstat::inference::GofResult,
}

#[derive(Serialize)]
struct RegressOutput {
    observations: usize,
    dropped_rows: usize,
    fit: rootstat::inference::RegressionFit,
}
