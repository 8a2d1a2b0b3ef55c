use perco_core::exploration::{direct_sample_oracle, run_dfs_percolation};
use perco_core::generators::{circulant, random_regular};
use perco_core::{Graph, Probability, VertexSet};
use proptest::prelude::*;

fn small_regular() -> impl Strategy<Value = Graph> {
    (4usize..40, 3usize..7, any::<u64>()).prop_filter_map("n*d odd", |(n, d, seed)| {
        let d = d.min(n - 1);
        if n * d % 2 == 1 {
            return None;
        }
        random_regular(n, d, seed).ok()
    })
}

fn subset(n: usize) -> impl Strategy<Value = VertexSet> {
    proptest::collection::vec(any::<bool>(), n)
        .prop_map(move |bits| VertexSet::from_vertices(n, (0..n).filter(|&i| bits[i])))
}

fn graph_and_sets() -> impl Strategy<Value = (Graph, VertexSet, VertexSet)> {
    small_regular().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), subset(n), subset(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordered_pair_count_is_symmetric((g, b, c) in graph_and_sets()) {
        prop_assert_eq!(g.ordered_pair_edge_count(&b, &c), g.ordered_pair_edge_count(&c, &b));
    }

    #[test]
    fn degree_sum_over_whole_vertex_set((g, s, _) in graph_and_sets()) {
        let all = VertexSet::full(g.n());
        prop_assert_eq!(g.ordered_pair_edge_count(&s, &all), (g.degree_bound() * s.len()) as u64);
    }

    #[test]
    fn handshake_bounds_neighborhood((g, s, _) in graph_and_sets()) {
        let cut = g.ordered_pair_edge_count(&s, &s.complement());
        prop_assert!(g.external_neighborhood(&s).len() as u64 <= cut);
        let d = g.degree_bound() as u64;
        prop_assert_eq!(cut, d * s.len() as u64 - 2 * g.internal_edge_count(&s));
        prop_assert_eq!(2 * g.internal_edge_count(&s), g.ordered_pair_edge_count(&s, &s));
    }

    #[test]
    fn components_partition_the_active_set((g, active, _) in graph_and_sets()) {
        let comps = g.connected_components(&active);
        let mut seen = VertexSet::new(g.n());
        let mut label = vec![usize::MAX; g.n()];
        for (i, comp) in comps.iter().enumerate() {
            prop_assert!(comp.windows(2).all(|w| w[0] < w[1]));
            for &v in comp {
                prop_assert!(active.contains(v));
                prop_assert!(seen.insert(v));
                label[v] = i;
            }
            // connected inside G[active]
            let part = VertexSet::from_vertices(g.n(), comp.iter().copied());
            prop_assert_eq!(g.connected_components(&part).len(), 1);
        }
        prop_assert_eq!(seen.len(), active.len());
        prop_assert!(comps.windows(2).all(|w| w[0][0] < w[1][0]));
        for (u, v) in g.edges() {
            if active.contains(u) && active.contains(v) {
                prop_assert_eq!(label[u], label[v]);
            }
        }
    }

    #[test]
    fn coupled_runs_are_monotone_in_p(g in small_regular(), seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r_lo = run_dfs_percolation(&g, Probability::new(lo).unwrap(), seed, false).r;
        let r_hi = run_dfs_percolation(&g, Probability::new(hi).unwrap(), seed, false).r;
        prop_assert!(r_lo.is_subset(&r_hi));
    }

    #[test]
    fn dfs_matches_direct_sample(g in small_regular(), seed in any::<u64>(), p in 0.0f64..=1.0) {
        let p = Probability::new(p).unwrap();
        let report = run_dfs_percolation(&g, p, seed, false);
        let (r, comps) = direct_sample_oracle(&g, p, seed);
        prop_assert_eq!(&report.r, &r);
        prop_assert_eq!(report.partition(), comps);
    }

    #[test]
    fn random_regular_is_deterministic_and_regular(n in 4usize..60, d in 3usize..10, seed in any::<u64>()) {
        prop_assume!(d < n && n * d % 2 == 0);
        let a = random_regular(n, d, seed).unwrap();
        let b = random_regular(n, d, seed).unwrap();
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
        prop_assert!(a.validate().is_ok());
        prop_assert!(a.is_regular());
        prop_assert!((0..n).all(|v| a.degree(v) == d));
    }

    #[test]
    fn circulant_adjacency_is_plus_minus_offsets(n in 5usize..40, o1 in 1usize..3, o2 in 3usize..5) {
        prop_assume!(2 * o2 <= n);
        let g = circulant(n, &[o1, o2]).unwrap();
        for v in 0..n {
            for s in [o1, o2] {
                prop_assert!(g.has_edge(v, (v + s) % n));
                prop_assert!(g.has_edge(v, (v + n - s) % n));
            }
        }
    }
}
