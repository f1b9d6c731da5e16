//! Seeded random graphs shared by the integration tests.
#![allow(dead_code)]

use egospectral::harness::{generate_synthetic, SyntheticSpec};
use egospectral::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero weight drawn from `(0, 2]`, or from `[-2, 2] \ {0}` when `signed`.
pub fn weight(rng: &mut ChaCha8Rng, signed: bool) -> f64 {
    let w = rng.gen_range(0.05..=2.0);
    if signed && rng.gen_bool(0.5) {
        -w
    } else {
        w
    }
}

pub fn reweight(g: &Graph, rng: &mut ChaCha8Rng, signed: bool) -> Graph {
    g.map_weights(|_, _, _| weight(rng, signed)).unwrap()
}

/// G(n, p) with at least one edge.
pub fn erdos_renyi(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    loop {
        let g = generate_synthetic(&SyntheticSpec::ErdosRenyi { n, p }, rng.gen()).unwrap();
        if g.edge_count() > 0 {
            return g;
        }
    }
}

pub fn preferential_attachment(rng: &mut ChaCha8Rng, n: usize, edges_per_node: usize) -> Graph {
    generate_synthetic(&SyntheticSpec::PreferentialAttachment { n, edges_per_node }, rng.gen()).unwrap()
}

/// The sandwich test set: 100 ER graphs with `n` in `[5, 60]` and 100
/// preferential-attachment graphs with `n` in `[20, 60]`; every other graph
/// carries random positive weights.
pub fn sandwich_set(seed: u64) -> Vec<Graph> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(200);
    for k in 0..200 {
        let g = if k < 100 {
            let n = rng.gen_range(5..=60);
            let p = rng.gen_range(0.05..0.6);
            erdos_renyi(&mut rng, n, p)
        } else {
            let n = rng.gen_range(20..=60);
            let m = rng.gen_range(1..=4);
            preferential_attachment(&mut rng, n, m)
        };
        out.push(if k % 2 == 1 { reweight(&g, &mut rng, false) } else { g });
    }
    out
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
}

pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|j| (0, j, 1.0))).unwrap()
}

/// Largest eigenvalue from the dense symmetric eigensolver.
pub fn dense_lambda1(g: &Graph) -> f64 {
    egospectral::sym_eigenvalues(&g.dense_adjacency()).unwrap()[0]
}

/// Edge list with no self-loops or repeated pairs, weights from `weight`.
pub fn simple_edges(n: usize, raw: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    let mut seen = std::collections::HashSet::new();
    raw.into_iter()
        .filter(|&(i, j, _)| i != j && i < n && j < n && seen.insert((i.min(j), i.max(j))))
        .collect()
}

pub mod strategies {
    use super::simple_edges;
    use egospectral::Graph;
    use proptest::prelude::*;

    fn build(n: usize, raw: Vec<(usize, usize, f64)>) -> Graph {
        Graph::from_edges(n, simple_edges(n, raw)).unwrap()
    }

    /// Graphs on `2..=max_n` nodes; weights from `w`.
    pub fn graph_with(max_n: usize, w: impl Strategy<Value = f64> + Clone + 'static) -> impl Strategy<Value = Graph> {
        (2..=max_n).prop_flat_map(move |n| {
            proptest::collection::vec((0..n, 0..n, w.clone()), 1..=3 * n).prop_map(move |raw| build(n, raw))
        })
    }

    pub fn unweighted(max_n: usize) -> impl Strategy<Value = Graph> {
        graph_with(max_n, Just(1.0))
    }

    pub fn positive(max_n: usize) -> impl Strategy<Value = Graph> {
        graph_with(max_n, 0.05f64..=2.0)
    }

    pub fn signed(max_n: usize) -> impl Strategy<Value = Graph> {
        graph_with(max_n, (0.05f64..=2.0, any::<bool>()).prop_map(|(w, neg)| if neg { -w } else { w }))
    }

    /// Connected graph: a random spanning tree plus extra edges.
    pub fn connected(max_n: usize, w: impl Strategy<Value = f64> + Clone + 'static) -> impl Strategy<Value = Graph> {
        (2..=max_n).prop_flat_map(move |n| {
            let parents: Vec<_> = (1..n).map(|i| (0..i, w.clone())).collect();
            (parents, proptest::collection::vec((0..n, 0..n, w.clone()), 0..=2 * n)).prop_map(move |(tree, extra)| {
                let mut raw: Vec<_> = tree.into_iter().enumerate().map(|(k, (p, w))| (k + 1, p, w)).collect();
                raw.extend(extra);
                build(n, raw)
            })
        })
    }
}
