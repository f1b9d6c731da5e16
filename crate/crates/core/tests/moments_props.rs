mod common;

use common::strategies::*;
use egospectral::moments::spectral_moments_from_egonets_with;
use egospectral::{
    closed_walk_oracle, edge_triangle_moments, moments_exact_trace, spectral_moments_from_egonets, Graph,
    MomentOptions, MomentSequence, SymMatrix,
};
use proptest::prelude::*;

fn matmul(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let n = a.dim();
    // powers of a symmetric matrix stay symmetric
    SymMatrix::from_fn(n, |i, j| (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum())
}

/// Entrywise agreement relative to the moments of `|A|`, which bound `|m_k|`.
fn assert_moments_match(g: &Graph, got: &MomentSequence, want: &MomentSequence, tol: f64) -> Result<(), TestCaseError> {
    let abs = moments_exact_trace(&g.map_weights(|_, _, w| w.abs()).unwrap(), want.max_order()).unwrap();
    prop_assert_eq!(got.values().len(), want.values().len());
    for k in 0..want.values().len() {
        let err = (got.get(k) - want.get(k)).abs();
        prop_assert!(err <= tol * abs.get(k), "m_{}: {} vs {}", k, got.get(k), want.get(k));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn egonet_route_matches_trace_signed(g in connected(40, (0.05f64..=2.0, any::<bool>()).prop_map(|(w, s)| if s { -w } else { w })), r in 1usize..=3) {
        let ego = spectral_moments_from_egonets(&g, r).unwrap();
        assert_moments_match(&g, &ego, &moments_exact_trace(&g, 2 * r + 1).unwrap(), 1e-9)?;
        prop_assert_eq!(ego.negative_weights, g.has_negative_weights());
    }

    #[test]
    fn egonet_route_matches_trace_positive(g in connected(40, 0.05f64..=2.0), r in 1usize..=3) {
        let ego = spectral_moments_from_egonets(&g, r).unwrap();
        assert_moments_match(&g, &ego, &moments_exact_trace(&g, 2 * r + 1).unwrap(), 1e-9)?;
    }

    #[test]
    fn walk_enumeration_matches_matrix_powers(g in signed(20), pick in any::<prop::sample::Index>()) {
        let i = pick.index(g.node_count());
        let a = g.dense_adjacency();
        let mut power = a.clone();
        for k in 1..=6 {
            if k > 1 {
                power = matmul(&power, &a);
            }
            let walks = closed_walk_oracle(&g, i, k).unwrap();
            let want = power.get(i, i);
            prop_assert!((walks - want).abs() <= 1e-9 * want.abs().max(1.0), "k = {}: {} vs {}", k, walks, want);
        }
    }

    #[test]
    fn edge_triangle_moments_match_trace(g in unweighted(40)) {
        let counts = edge_triangle_moments(&g).unwrap();
        let trace = moments_exact_trace(&g, 3).unwrap();
        for k in 0..=3 {
            prop_assert!((counts.moments.get(k) - trace.get(k)).abs() <= 1e-12 * trace.get(k).abs().max(1.0));
        }
    }

    #[test]
    fn moments_scale_as_powers(g in positive(30), c in prop::sample::select(vec![0.5, 3.0])) {
        let m = spectral_moments_from_egonets(&g, 2).unwrap();
        let scaled = spectral_moments_from_egonets(&g.map_weights(|_, _, w| c * w).unwrap(), 2).unwrap();
        let expected = m.scaled(c);
        for k in 0..=5 {
            prop_assert!((scaled.get(k) - expected.get(k)).abs() <= 1e-12 * expected.get(k).abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn worker_count_does_not_change_bits(g in signed(60), r in 1usize..=2, workers in 2usize..=5) {
        let serial = spectral_moments_from_egonets_with(&g, r, &MomentOptions { workers: Some(1) }).unwrap();
        for opts in [MomentOptions { workers: Some(workers) }, MomentOptions { workers: None }] {
            let par = spectral_moments_from_egonets_with(&g, r, &opts).unwrap();
            let same = serial.values().iter().zip(par.values()).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
    }
}
