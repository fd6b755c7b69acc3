mod common;

use proptest::prelude::*;

use rootstat::census::{count_at, rooted_count, CountVector};
use rootstat::inference::bootstrap::{squared_norm, BootstrapMoments, Standardizer};
use rootstat::overlap::verify_product_identity_all;
use rootstat::random_graph::Kernel;
use rootstat::rng::pair_uniform;
use rootstat::{catalog, overlap_set, Graph, RootedMotif};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), prop::collection::vec(prop::bool::weighted(0.4), pairs)).prop_map(|(n, bits)| {
            let mut edges = Vec::new();
            let mut t = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[t] {
                        edges.push((a, b));
                    }
                    t += 1;
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn small_motifs() -> Vec<RootedMotif> {
    catalog::all().into_iter().map(|(_, m)| m).filter(|m| m.order() <= 4).collect()
}

fn motif_strategy() -> impl Strategy<Value = RootedMotif> {
    prop::sample::select(catalog::all().into_iter().map(|(_, m)| m).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_counts_sum_to_twice_the_edges(g in graph_strategy(14)) {
        let c = CountVector::compute(&g, &catalog::edge()).unwrap();
        prop_assert_eq!(c.counts.iter().sum::<u64>(), 2 * g.edge_count() as u64);
    }

    #[test]
    fn counts_follow_relabelling(
        (g, perm) in graph_strategy(10).prop_flat_map(|g| {
            let n = g.n();
            (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        }),
        motif in motif_strategy(),
    ) {
        let h = g.relabel(&perm).unwrap();
        for v in 0..g.n() {
            prop_assert_eq!(count_at(&g, v, &motif).unwrap(), count_at(&h, perm[v], &motif).unwrap());
        }
    }

    #[test]
    fn fast_paths_match_backtracking(g in graph_strategy(12), motif in motif_strategy()) {
        for v in 0..g.n() {
            prop_assert_eq!(count_at(&g, v, &motif).unwrap(), rooted_count(&g, v, &motif).unwrap());
        }
    }

    #[test]
    fn product_identity_on_random_graphs(
        g in graph_strategy(10),
        a in prop::sample::select(small_motifs()),
        b in prop::sample::select(small_motifs()),
    ) {
        let set = overlap_set(&a, &b).unwrap();
        for check in verify_product_identity_all(&g, &set).unwrap() {
            prop_assert!(check.holds, "vertex {}: {} != {}", check.vertex, check.lhs, check.rhs);
        }
    }

    #[test]
    fn rerooting_accounts_for_every_embedding(g in graph_strategy(9), motif in motif_strategy()) {
        let edges = motif.edges();
        let k = motif.order();
        let mut codes = Vec::new();
        let mut rooted_total = 0u64;
        for p in 0..k {
            let r = RootedMotif::new(k, p, &edges).unwrap();
            let code = r.canonical_code().unwrap();
            if codes.contains(&code) {
                continue;
            }
            codes.push(code);
            rooted_total += (0..g.n()).map(|v| rooted_count(&g, v, &r).unwrap()).sum::<u64>();
        }
        prop_assert_eq!(
            rooted_total * common::unrooted_aut(&motif),
            k as u64 * common::embeddings(&g, &motif)
        );
    }

    #[test]
    fn standardized_norm_is_affine_invariant(
        mean in prop::collection::vec(-2.0f64..2.0, 2),
        l in prop::collection::vec(0.3f64..2.0, 3),
        a in prop::collection::vec(-2.0f64..2.0, 4),
        shift in prop::collection::vec(-5.0f64..5.0, 2),
        s in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        // covariance L L' with L lower triangular and positive diagonal
        let cov = vec![
            vec![l[0] * l[0], l[0] * l[1]],
            vec![l[0] * l[1], l[1] * l[1] + l[2] * l[2]],
        ];
        let det = a[0] * a[3] - a[1] * a[2];
        prop_assume!(det.abs() > 0.2);
        let apply = |x: &[f64]| vec![a[0] * x[0] + a[1] * x[1] + shift[0], a[2] * x[0] + a[3] * x[1] + shift[1]];
        let ac = [
            [a[0] * cov[0][0] + a[1] * cov[1][0], a[0] * cov[0][1] + a[1] * cov[1][1]],
            [a[2] * cov[0][0] + a[3] * cov[1][0], a[2] * cov[0][1] + a[3] * cov[1][1]],
        ];
        let cov2 = vec![
            vec![ac[0][0] * a[0] + ac[0][1] * a[1], ac[0][0] * a[2] + ac[0][1] * a[3]],
            vec![ac[1][0] * a[0] + ac[1][1] * a[1], ac[1][0] * a[2] + ac[1][1] * a[3]],
        ];
        let moments = |m: Vec<f64>, c: Vec<Vec<f64>>| BootstrapMoments {
            motifs: vec![catalog::triangle(), catalog::square()],
            replicates: 10,
            means: vec![m],
            covariances: vec![c],
            present: vec![true],
        };
        let before = Standardizer::new(&moments(mean.clone(), cov), None).unwrap();
        let after = Standardizer::new(&moments(apply(&mean), cov2), None).unwrap();
        let t1 = squared_norm(&before.apply(&s, 0));
        let t2 = squared_norm(&after.apply(&apply(&s), 0));
        prop_assert!((t1 - t2).abs() <= 1e-6 * (1.0 + t1), "{t1} vs {t2}");
    }

    #[test]
    fn pair_uniforms_are_symmetric(seed in any::<u64>(), stream in 0u64..8, i in 0usize..10_000, j in 0usize..10_000) {
        let u = pair_uniform(seed, stream, i, j);
        prop_assert_eq!(u, pair_uniform(seed, stream, j, i));
        prop_assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn kernel_json_round_trip(
        k in 1usize..5,
        raw in prop::collection::vec(0.01f64..1.0, 16),
        weights in prop::collection::vec(0.1f64..1.0, 4),
    ) {
        let mut b = vec![vec![0.0; k]; k];
        for r in 0..k {
            for c in r..k {
                b[r][c] = raw[r * 4 + c];
                b[c][r] = raw[r * 4 + c];
            }
        }
        let total: f64 = weights[..k].iter().sum();
        let pi: Vec<f64> = weights[..k].iter().map(|w| w / total).collect();
        let kernel = Kernel::new(b, pi).unwrap();
        let text = serde_json::to_string(&kernel).unwrap();
        let back: Kernel = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.k(), k);
        for r in 0..k {
            prop_assert!((back.pi()[r] - kernel.pi()[r]).abs() < 1e-15);
            for c in 0..k {
                prop_assert!((back.b(r, c) - kernel.b(r, c)).abs() < 1e-15);
            }
        }
    }
}
