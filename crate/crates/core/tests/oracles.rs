//! Checks against independent reimplementations: dense adjacency matrices,
//! bitmask subset walks and naive window counts.

use perco_core::analysis::{
    enumerate_non_expanding, list_non_expanding, max_window_ones, stream_properties, Side,
};
use perco_core::exploration::{
    cycle_guaranteed, find_cycle_from_path, run_dfs_percolation, validate_path,
};
use perco_core::generators::{disjoint_cliques, random_regular};
use perco_core::rng::{bernoulli_bits, chacha, derive_seed};
use perco_core::spectral::{
    low_degree_set, mixing_lemma_check, spectral_report_with, Method,
};
use perco_core::{Graph, Probability, VertexSet};
use rand::Rng;

fn dense(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

fn random_set(n: usize, rng: &mut impl Rng) -> VertexSet {
    let density: f64 = rng.gen();
    VertexSet::from_vertices(n, (0..n).filter(|_| rng.gen_bool(density)))
}

/// Non-expanding m-subsets of a graph on at most 32 vertices, as bitmasks.
fn bitmask_non_expanding(a: &[Vec<bool>], d: usize, m: usize, alpha0: f64) -> Vec<u32> {
    let n = a.len();
    let nbr: Vec<u32> = a
        .iter()
        .map(|row| row.iter().enumerate().fold(0u32, |acc, (j, &e)| acc | ((e as u32) << j)))
        .collect();
    let (nf, df, mf) = (n as f64, d as f64, m as f64);
    let rhs = (1.0 - alpha0) * (df * mf - df * df * mf * mf / (2.0 * nf));
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == m)
        .filter(|&s| {
            let reach = (0..n).filter(|&v| s >> v & 1 == 1).fold(0u32, |acc, v| acc | nbr[v]);
            ((reach & !s).count_ones() as f64) < rhs
        })
        .collect()
}

fn mask_to_vec(s: u32) -> Vec<usize> {
    (0..32).filter(|&v| s >> v & 1 == 1).collect()
}

#[test]
fn enumeration_matches_bitmask_oracle() {
    let g = random_regular(16, 4, 5).unwrap();
    let a = dense(&g);
    for m in 3..=5 {
        let mut expected: Vec<Vec<usize>> =
            bitmask_non_expanding(&a, 4, m, 0.2).into_iter().map(mask_to_vec).collect();
        expected.sort();
        let listed = list_non_expanding(&g, m, 0.2).unwrap();
        assert_eq!(listed, expected, "m = {m}");
        let count = enumerate_non_expanding(&g, m, 0.2).unwrap();
        assert_eq!(count.non_expanding as usize, expected.len());
        assert_eq!(count.total, (0u32..1 << 16).filter(|s| s.count_ones() as usize == m).count() as u64);
    }
}

#[test]
fn whole_cliques_are_non_expanding() {
    let g = disjoint_cliques(12, 3).unwrap();
    let expected: Vec<Vec<usize>> = bitmask_non_expanding(&dense(&g), 3, 4, 0.2)
        .into_iter()
        .map(mask_to_vec)
        .collect();
    let listed = list_non_expanding(&g, 4, 0.2).unwrap();
    let mut sorted = expected.clone();
    sorted.sort();
    assert_eq!(listed, sorted);
    for c in 0..3 {
        let clique: Vec<usize> = (4 * c..4 * c + 4).collect();
        assert!(listed.contains(&clique));
    }
}

#[test]
fn window_maximum_matches_naive_recount() {
    let mut rng = chacha(11);
    for trial in 0..50 {
        let len = rng.gen_range(1..400);
        let p = Probability::new(rng.gen_range(0.0..1.0)).unwrap();
        let bits = bernoulli_bits(p, trial, len);
        for window in [1, 2, 7, 50, len, len + 3] {
            let w = window.min(len);
            let naive = (0..=len - w)
                .map(|i| bits[i..i + w].iter().filter(|&&b| b).count())
                .max()
                .unwrap();
            assert_eq!(max_window_ones(&bits, window), naive);
        }
    }
}

#[test]
fn subcritical_sparse_window_property_matches_recount() {
    // n = 2000, eps = 0.5: k = ceil(16 ln 2000) = 122, windows of 122*5 bits
    let (n, d, eps) = (2000, 5, 0.5);
    let k = (4.0 / (eps * eps) * (n as f64).ln()).ceil() as usize;
    for seed in 0..20 {
        // mean window load near k so both verdicts occur
        let p = Probability::new(0.16 + 0.005 * seed as f64).unwrap();
        let bits = bernoulli_bits(p, seed, n);
        let worst = (0..=n - k * d)
            .map(|i| bits[i..i + k * d].iter().filter(|&&b| b).count())
            .max()
            .unwrap();
        let props = stream_properties(&bits, eps, d, n, Side::Subcritical).unwrap();
        assert_eq!(props.sparse_windows, Some(worst < k), "seed {seed}");
    }
}

#[test]
fn mixing_lemma_on_random_regular() {
    let g = random_regular(500, 10, 7).unwrap();
    let full = spectral_report_with(&g, 1e-9, Method::FullEigensolve).unwrap();
    let iter = spectral_report_with(&g, 1e-9, Method::Iterative).unwrap();
    assert!((full.lambda - iter.lambda).abs() < 1e-6);
    // Alon-Boppana keeps lambda near 2 sqrt(d - 1) = 6
    assert!(full.lambda > 5.0 && full.lambda < 7.0, "lambda {}", full.lambda);

    let a = dense(&g);
    let mut rng = chacha(derive_seed(7, &[500]));
    for _ in 0..300 {
        let b = random_set(g.n(), &mut rng);
        let c = random_set(g.n(), &mut rng);
        let e: usize = b.iter().map(|u| c.iter().filter(|&v| a[u][v]).count()).sum();
        assert_eq!(g.ordered_pair_edge_count(&b, &c), e as u64);
        let check = mixing_lemma_check(&g, full.lambda, &b, &c);
        let lhs = (e as f64 - 10.0 / 500.0 * (b.len() * c.len()) as f64).abs();
        assert!((check.lhs - lhs).abs() < 1e-9);
        assert!(check.holds, "{check:?}");
    }
}

#[test]
fn low_degree_sets_stay_small() {
    let g = random_regular(1000, 10, 3).unwrap();
    let lambda = spectral_report_with(&g, 1e-9, Method::FullEigensolve).unwrap().lambda;
    let a = dense(&g);
    let mut rng = chacha(3);
    for _ in 0..50 {
        let size = rng.gen_range(500..=1000);
        let mut vs: Vec<usize> = (0..1000).collect();
        rand::seq::SliceRandom::shuffle(vs.as_mut_slice(), &mut rng);
        let b = VertexSet::from_vertices(1000, vs[..size].iter().copied());
        for alpha in [0.25, 0.5] {
            let low = low_degree_set(&g, &b, alpha).unwrap();
            let cut = (1.0 - alpha) * size as f64 * 10.0 / 1000.0;
            let naive = (0..1000)
                .filter(|&v| (b.iter().filter(|&u| a[v][u]).count() as f64) <= cut)
                .count();
            assert_eq!(low.len(), naive);
            let bound = 2.0 / (alpha * alpha) * (lambda / 10.0).powi(2) * 1000.0;
            assert!(low.len() as f64 <= bound, "{} > {bound}", low.len());
        }
    }
}

#[test]
fn long_witness_path_closes_a_cycle() {
    let g = random_regular(2000, 200, 1).unwrap();
    let lambda = spectral_report_with(&g, 1e-8, Method::FullEigensolve).unwrap().lambda;
    let report = run_dfs_percolation(&g, Probability::new(0.9).unwrap(), 4, false);
    let path = report.witness_path();
    validate_path(&g, path).unwrap();
    assert!(cycle_guaranteed(&g, path.len(), lambda), "path {} too short for lambda {lambda}", path.len());
    let cycle = find_cycle_from_path(&g, path, lambda).unwrap().expect("guaranteed cycle");
    assert!(cycle.len() >= path.len() / 3 + 2);
    validate_path(&g, &cycle).unwrap();
    assert!(g.has_edge(cycle[0], cycle[cycle.len() - 1]));
}
