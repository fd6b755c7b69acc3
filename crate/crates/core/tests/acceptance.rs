//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero when any fails. Pass criterion numbers as arguments to run
//! a subset, e.g. `cargo test --test acceptance -- 1 2 3`.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use rootstat::census::count_at;
use rootstat::experiments::{
    average_clt_experiment, gof_experiment, rho_from_exponent, vertex_clt_experiment, AverageCltConfig, ClosureSpec,
    GofExperimentConfig, Sampler, TestFunction, VertexCltConfig,
};
use rootstat::fixtures::{fig_a1, fig_c1_kernel};
use rootstat::inference::logistic_fit;
use rootstat::overlap::{inductive_coefficients, overlap_set, verify_product_identity_all};
use rootstat::random_graph::{expected_count, sample_graph, sample_local, variance_count, SampleSpec};
use rootstat::rng::{self, stream};
use rootstat::{catalog, census, stats, RootedMotif};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail.push_str(&format!("; runtime {took:.1?} over {limit:?}"));
        }
    }
    (o, took)
}

fn c1_fig_a1_counts() -> Outcome {
    let fx = fig_a1();
    let printed = [
        (fx.i, "triangle", 1),
        (fx.i, "cherry", 8),
        (fx.i, "diamond", 0),
        (fx.i, "square", 2),
        (fx.j, "triangle", 2),
        (fx.j, "cherry", 9),
        (fx.j, "diamond", 1),
        (fx.j, "square", 2),
    ];
    let mut wrong = Vec::new();
    for (v, name, want) in printed {
        let got = count_at(&fx.graph, v, &catalog::by_name(name).unwrap()).unwrap();
        if got != want {
            wrong.push(format!("{name}@{}={got}", fx.labels[v]));
        }
    }
    outcome(wrong.is_empty(), format!("8 printed counts, mismatches: {wrong:?}"))
}

fn c2_fig_a2_coefficients() -> Outcome {
    let printed: [(&str, &str, Vec<(&str, u64)>); 3] = [
        ("triangle", "triangle", vec![("bowtie", 2), ("diamond", 2), ("triangle", 1)]),
        (
            "cherry",
            "cherry",
            vec![
                ("two-cherries", 2),
                ("square", 2),
                ("shovel", 2),
                ("tripod", 2),
                ("triangle", 2),
                ("cherry", 1),
            ],
        ),
        (
            "triangle",
            "cherry",
            vec![("triangle-cherry", 1), ("diamond", 2), ("shovel", 1), ("triangle", 2)],
        ),
    ];
    let mut problems = Vec::new();
    for (a, b, want) in printed {
        let (f1, f2) = (catalog::by_name(a).unwrap(), catalog::by_name(b).unwrap());
        let direct = overlap_set(&f1, &f2).unwrap();
        let inductive = inductive_coefficients(&f1, &f2).unwrap();
        let got: Vec<(String, u64)> = direct
            .entries
            .iter()
            .map(|e| (catalog::name_of(&e.motif).unwrap_or("?").to_string(), e.coefficient))
            .collect();
        let want: Vec<(String, u64)> = want.iter().map(|(n, c)| (n.to_string(), *c)).collect();
        if got != want {
            problems.push(format!("{a}x{b}: got {got:?}"));
        }
        if direct != inductive {
            problems.push(format!("{a}x{b}: inductive differs"));
        }
    }
    outcome(problems.is_empty(), format!("3 overlap sets, direct and inductive; problems: {problems:?}"))
}

fn c3_product_identity() -> Outcome {
    let motifs: Vec<RootedMotif> = catalog::all().into_iter().map(|(_, m)| m).collect();
    let mut sets = Vec::new();
    for a in &motifs {
        for b in &motifs {
            sets.push(overlap_set(a, b).unwrap());
        }
    }
    let failures: usize = (0..50u64)
        .into_par_iter()
        .map(|s| {
            let n = 10 + (s as usize % 21);
            let g = common::gnp(n, 4.0 / n as f64, SEED + s);
            sets.iter()
                .map(|set| verify_product_identity_all(&g, set).unwrap().iter().filter(|r| !r.holds).count())
                .sum::<usize>()
        })
        .sum();
    outcome(
        failures == 0,
        format!("{} motif pairs x 50 graphs (n in 10..=30), violations {failures}", sets.len()),
    )
}

fn c4_subset_oracle() -> Outcome {
    let motifs = catalog::all();
    let mismatches: usize = (0..200u64)
        .into_par_iter()
        .map(|s| {
            let n = 6 + (s as usize % 7);
            let p = 0.25 + 0.5 * ((s % 5) as f64 / 4.0);
            let g = common::gnp(n, p, SEED + 1000 + s);
            let mut bad = 0;
            for (_, m) in &motifs {
                for v in 0..n {
                    if count_at(&g, v, m).unwrap() != common::subset_count(&g, v, m) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();
    outcome(
        mismatches == 0,
        format!("{} motifs x 200 graphs (n in 6..=12), mismatches {mismatches}", motifs.len()),
    )
}

/// Counts at vertex 0 with its latent fixed, over `reps` replicates.
fn root_counts(n: usize, rho: f64, root_latent: f64, motifs: &[RootedMotif], reps: usize, seed: u64) -> Vec<Vec<f64>> {
    let kernel = fig_c1_kernel();
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let spec = SampleSpec::new(n, rho, rng::derive_seed(seed, stream::REPLICATES, r)).with_root_latent(root_latent);
            let (g, _) = if n <= 500 {
                sample_graph(&kernel, &spec).unwrap()
            } else {
                sample_local(&kernel, &spec, 0).unwrap()
            };
            motifs.iter().map(|m| count_at(&g, 0, m).unwrap() as f64).collect()
        })
        .collect()
}

fn first_four() -> Vec<RootedMotif> {
    vec![catalog::edge(), catalog::cherry(), catalog::triangle(), catalog::square()]
}

fn c5_first_moment() -> Outcome {
    let (n, rho, x, reps) = (200, 0.15, 0.5, 2000);
    let kernel = fig_c1_kernel();
    let block = kernel.block_of(x);
    let motifs = first_four();
    let counts = root_counts(n, rho, x, &motifs, reps, SEED + 5);
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, m) in motifs.iter().enumerate() {
        let col: Vec<f64> = counts.iter().map(|c| c[t]).collect();
        let want = expected_count(&kernel, m, block, n, rho).unwrap();
        let se = (stats::variance(&col) / reps as f64).sqrt();
        let z = (stats::mean(&col) - want) / se;
        pass &= z.abs() <= 3.0;
        parts.push(format!("{m} {z:+.2}se"));
    }
    outcome(pass, format!("n={n} rho={rho} L={reps}: {}", parts.join(", ")))
}

fn c6_variance() -> Outcome {
    let (n, rho, x, reps) = (2000, 0.04, 0.5, 4000);
    let kernel = fig_c1_kernel();
    let block = kernel.block_of(x);
    let motifs = first_four();
    let counts = root_counts(n, rho, x, &motifs, reps, SEED + 6);
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, m) in motifs.iter().enumerate() {
        let r = m.m_parameter();
        let regime = n as f64 * rho.powf(*r.numer() as f64 / *r.denom() as f64);
        let col: Vec<f64> = counts.iter().map(|c| c[t]).collect();
        let ratio = stats::variance(&col) / variance_count(&kernel, m, block, n, rho).unwrap();
        pass &= regime >= 10.0 && (ratio - 1.0).abs() <= 0.15;
        parts.push(format!("{m} n*rho^m={regime:.0} ratio={ratio:.3}"));
    }
    outcome(pass, format!("L={reps}: {}", parts.join(", ")))
}

fn c7_vertex_clt() -> Outcome {
    let n = 5000;
    let cfg = VertexCltConfig {
        kernel: fig_c1_kernel(),
        n,
        rho: rho_from_exponent(n, 1.0 / 3.0),
        replicates: 200,
        motifs: vec![catalog::triangle(), catalog::square()],
        root_latent: 0.5,
        seed: SEED + 7,
        sampler: Sampler::Auto,
    };
    let r = vertex_clt_experiment(&cfg).unwrap();
    let mut pass = r.ks.p_value >= 0.01;
    let mut parts = vec![format!("KS p={:.3}", r.ks.p_value)];
    for m in &r.motifs {
        for e in &m.moments[1..4] {
            pass &= e.within(3.0);
            parts.push(format!("{} m{}={:.2}({:.1}se)", m.motif, e.order, e.value, e.deviation()));
        }
    }
    outcome(pass, parts.join(", "))
}

fn c8_average_clt() -> Outcome {
    let n = 4000;
    let cfg = AverageCltConfig {
        kernel: fig_c1_kernel(),
        n,
        rho: rho_from_exponent(n, 1.0 / 3.0),
        replicates: 500,
        motifs: vec![catalog::triangle(), catalog::square()],
        function: TestFunction::Identity,
        seed: SEED + 8,
    };
    let r = average_clt_experiment(&cfg).unwrap();
    let mut pass = !r.degenerate;
    let mut parts = Vec::new();
    for t in 0..cfg.motifs.len() {
        let err = r.relative_variance_error[t];
        let p = r.ks[t].p_value;
        pass &= err.abs() <= 0.15 && p >= 0.01;
        parts.push(format!(
            "{} var/Sigma={:.2} KS p={:.3} (var/projection={:.2})",
            cfg.motifs[t],
            1.0 + err,
            p,
            1.0 + r.projection_variance_error[t]
        ));
    }
    outcome(pass, parts.join(", "))
}

fn gof_setup(pipelines: usize, seed: u64) -> GofExperimentConfig {
    GofExperimentConfig::new(fig_c1_kernel(), 200, pipelines, seed)
}

fn c9_gof_level() -> Outcome {
    let r = gof_experiment(&gof_setup(200, SEED + 9)).unwrap();
    let (lo, hi) = r.level_band;
    let boot = r.rejections as u64;
    let pass = (lo..=hi).contains(&boot) && r.rejections_bonferroni < r.rejections;
    let mean_cv = r.runs.iter().map(|p| p.critical_value).sum::<f64>() / r.pipelines as f64;
    outcome(
        pass,
        format!(
            "bootstrap {boot}/{} (99% band [{lo}, {hi}]), Bonferroni {}/{}; mean bootstrap critical value {mean_cv:.1} vs Bonferroni {:.1}",
            r.pipelines,
            r.rejections_bonferroni,
            r.pipelines,
            r.runs[0].bonferroni_critical_value
        ),
    )
}

fn c10_gof_power() -> Outcome {
    let mut cfg = gof_setup(100, SEED + 10);
    cfg.closure = Some(ClosureSpec {
        vertex_fraction: 0.05,
        path_fraction: 0.05,
    });
    let r = gof_experiment(&cfg).unwrap();
    let reps = r.pipelines as u64;
    // smallest count not rejecting p = 0.99 in a one-sided exact test at 1%
    let threshold = (0..=reps).find(|&k| stats::binomial_cdf(reps, 0.99, k) >= 0.01).unwrap();
    let added = r.runs.iter().map(|p| p.added_edges).sum::<usize>() as f64 / reps as f64;
    outcome(
        r.rejections as u64 >= threshold,
        format!(
            "rejected {}/{reps}; compatible with 1 needs >= {threshold}; {added:.1} edges added per graph",
            r.rejections
        ),
    )
}

fn c11_regression() -> Outcome {
    let (n, rho, reps, beta) = (2000, 0.1, 500u64, [0.5, 2.0]);
    let kernel = fig_c1_kernel();
    let names = vec!["intercept".to_string(), "triangle".to_string()];
    let fits: Vec<(bool, bool, f64)> = (0..reps)
        .into_par_iter()
        .map(|d| {
            let seed = rng::derive_seed(SEED + 11, stream::REPLICATES, d);
            let (g, _) = sample_graph(&kernel, &SampleSpec::new(n, rho, seed)).unwrap();
            let s = census(&g, &[catalog::triangle()]).unwrap().column(0);
            let mut r = rng::chacha(seed, stream::COVARIATES, 0);
            let y: Vec<u8> = s
                .iter()
                .map(|&v| {
                    let p = 1.0 / (1.0 + (-(beta[0] + beta[1] * v)).exp());
                    u8::from(r.gen::<f64>() < p)
                })
                .collect();
            let rows: Vec<Vec<f64>> = s.iter().map(|&v| vec![1.0, v]).collect();
            let fit = logistic_fit(&rows, &y, &names, 0.95).unwrap();
            let covers = fit.ci_lower[1] <= beta[1] && beta[1] <= fit.ci_upper[1];
            (covers, fit.converged, fit.gradient_norm)
        })
        .collect();
    let covered = fits.iter().filter(|f| f.0).count();
    let converged = fits.iter().filter(|f| f.1).count();
    let worst = fits.iter().filter(|f| f.1).map(|f| f.2).fold(0.0, f64::max);
    let coverage = covered as f64 / reps as f64;
    let pass = (0.93..=0.97).contains(&coverage) && worst < 1e-8;
    outcome(
        pass,
        format!("coverage {covered}/{reps} = {coverage:.3}; converged {converged}; max gradient {worst:.1e}"),
    )
}

fn main() {
    type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: [Criterion; 11] = [
        ("Fig A.1 exact counts", Some(Duration::from_secs(1)), c1_fig_a1_counts),
        ("overlap coefficients", Some(Duration::from_secs(10)), c2_fig_a2_coefficients),
        ("product identity", min(1), c3_product_identity),
        ("subset oracle equivalence", min(2), c4_subset_oracle),
        ("first-moment formula", min(5), c5_first_moment),
        ("leading-order variance", min(10), c6_variance),
        ("per-vertex CLT", None, c7_vertex_clt),
        ("averaged CLT", min(30), c8_average_clt),
        ("goodness-of-fit level", None, c9_gof_level),
        ("goodness-of-fit power", None, c10_gof_power),
        ("regression coverage", None, c11_regression),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .filter(|&k| (1..=criteria.len()).contains(&k))
        .collect();
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let number = k + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let (o, took) = timed(*limit, run);
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {number:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
