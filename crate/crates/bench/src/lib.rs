//! Workloads shared by the benchmarks.

use egospectral::harness::{generate_synthetic, SyntheticSpec};
use egospectral::{Graph, MomentSequence};

/// Preferential-attachment graph with mean degree close to `2 * edges_per_node`.
pub fn pa_graph(n: usize, edges_per_node: usize) -> Graph {
    generate_synthetic(&SyntheticSpec::PreferentialAttachment { n, edges_per_node }, 7).expect("valid generator spec")
}

/// Published order-5 moment sequences: (name, moments with node count).
pub fn published_fixtures() -> Vec<(&'static str, MomentSequence)> {
    let seq = |m: &[f64], n| MomentSequence::external(m.to_vec(), Some(n)).expect("valid fixture");
    vec![
        ("enron", seq(&[1.0, 0.0, 22.47, 394.7, 33491.0, 2603200.0], 3215)),
        ("skitter", seq(&[1.0, 0.0, 18.37, 341.1, 40001.0, 2777018.0], 2248)),
    ]
}
