use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use srks::graphlab::packing::is_tree_packing;
use srks::graphlab::spectral::all_resistances;
use srks::graphlab::{
    combinatorial_thinness, disjoint_spanning_trees, edge_vectors, spectral_thinness,
    thin_tree_pipeline, Edge, PipelineOptions, WeightedGraph,
};
use srks::instances::random_connected_graph;

/// A connected graph on `n ≤ max_n` vertices with random positive weights.
fn weighted_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (
        2..=max_n,
        any::<u64>(),
        prop::collection::vec(0.25f64..4.0, 28),
    )
        .prop_map(|(n, seed, w)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_m = n * (n - 1) / 2;
            let m = n - 1 + (seed as usize % (max_m + 2 - n));
            let g = random_connected_graph(n, m, &mut rng).unwrap();
            let edges = g
                .edges()
                .iter()
                .zip(&w)
                .map(|(e, &w)| Edge { u: e.u, v: e.v, w })
                .collect();
            WeightedGraph::new(n, edges).unwrap()
        })
}

fn incidence(n: usize, e: &Edge) -> DVector<f64> {
    let mut b = DVector::zeros(n);
    b[e.u] = 1.0;
    b[e.v] = -1.0;
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn foster_sum_is_n_minus_one(g in weighted_graph(8)) {
        let r = all_resistances(&g).unwrap();
        let sum: f64 = g.edges().iter().zip(&r).map(|(e, r)| e.w * r).sum();
        prop_assert!((sum - (g.n() - 1) as f64).abs() < 1e-9);
    }

    #[test]
    fn edge_vectors_are_isotropic_with_resistance_norms(g in weighted_graph(7)) {
        let all = g.all_edges().unwrap();
        let evs = edge_vectors(&g, all, None).unwrap();
        prop_assert_eq!(evs.dim, g.n() - 1);
        let r = all_resistances(&g).unwrap();
        for (k, &e) in evs.edges.iter().enumerate() {
            prop_assert!((evs.norm_sq(k) - g.edges()[e].w * r[e]).abs() < 1e-10);
        }
        let frame = evs.frame(all);
        prop_assert!((frame - DMatrix::<f64>::identity(evs.dim, evs.dim)).amax() < 1e-10);
    }

    #[test]
    fn spectral_thinness_dominates_cut_thinness(g in weighted_graph(7), seed in any::<u64>()) {
        let all = g.all_edges().unwrap();
        let weights: Vec<f64> = g.edges().iter().map(|e| e.w).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = g.wilson_tree(all, &weights, &mut rng).unwrap();
        prop_assert!(g.is_spanning_tree(t));
        let spectral = spectral_thinness(&g, t, None).unwrap();
        let cut = combinatorial_thinness(&g, t).unwrap();
        prop_assert!(spectral >= cut - 1e-9, "{} < {}", spectral, cut);
        prop_assert!(spectral <= 1.0 + 1e-9);
    }

    #[test]
    fn packings_are_disjoint_spanning_trees(g in weighted_graph(7), want in 1usize..=4) {
        let p = disjoint_spanning_trees(&g, g.all_edges().unwrap(), want).unwrap();
        prop_assert!(p.found >= 1 && p.found <= want);
        prop_assert_eq!(p.trees.len(), p.found);
        prop_assert!(is_tree_packing(&g, &p.trees));
        prop_assert!(p.trees.iter().all(|&t| g.is_spanning_tree(t)));
        prop_assert!(p.found <= g.m() / (g.n() - 1));
    }

    #[test]
    fn adding_d_shrinks_edge_vectors(g in weighted_graph(6), diag in prop::collection::vec(0.1f64..3.0, 6)) {
        let n = g.n();
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&diag[..n]));
        let evs = edge_vectors(&g, g.all_edges().unwrap(), Some(&d)).unwrap();
        let d_inv = d.clone().try_inverse().unwrap();
        let r = all_resistances(&g).unwrap();
        for (k, &i) in evs.edges.iter().enumerate() {
            let e = g.edges()[i];
            let b = incidence(n, &e);
            let upper = e.w * (b.transpose() * &d_inv * &b)[(0, 0)];
            prop_assert!(evs.norm_sq(k) <= upper + 1e-10);
            prop_assert!(evs.norm_sq(k) <= e.w * r[i] + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pipeline_tree_lies_inside_f(g in weighted_graph(5), drop in any::<u64>(), seed in any::<u64>()) {
        let all = g.all_edges().unwrap();
        // remove random edges while F stays connected
        let mut f = all;
        for e in 0..g.m() {
            let without = f & !(1u64 << e);
            if drop >> e & 1 == 1 && g.is_connected_on(without) {
                f = without;
            }
        }
        let opts = PipelineOptions { seed, ..PipelineOptions::default() };
        let cert = thin_tree_pipeline(&g, f, None, &opts).unwrap();
        prop_assert!(g.is_spanning_tree(cert.tree_mask));
        prop_assert_eq!(cert.tree_mask & !f, 0);
        prop_assert!(cert.alpha_combinatorial <= cert.alpha_spectral + 1e-9);
    }
}
