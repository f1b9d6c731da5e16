mod common;

use common::strategies::*;
use egospectral::graph::induced_subgraph;
use egospectral::{bfs_neighborhood, extract_egonet, parse_edge_list, write_edge_list, Graph, ParseOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn egonet_is_principal_submatrix(g in signed(50), pick in any::<prop::sample::Index>(), r in 1usize..=3) {
        let i = pick.index(g.node_count());
        let e = extract_egonet(&g, i, r).unwrap();
        let nodes = bfs_neighborhood(&g, i, r).unwrap();
        prop_assert_eq!(e.nodes(), &nodes[..]);
        prop_assert_eq!(nodes[0], i);
        let full = g.dense_adjacency();
        let local = e.matrix();
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate() {
                prop_assert_eq!(local.get(a, b), full.get(u, v));
            }
        }
    }

    #[test]
    fn neighborhoods_grow_with_radius(g in unweighted(40), pick in any::<prop::sample::Index>(), r in 0usize..=4) {
        let i = pick.index(g.node_count());
        let inner = bfs_neighborhood(&g, i, r).unwrap();
        let outer = bfs_neighborhood(&g, i, r + 1).unwrap();
        prop_assert!(inner.iter().all(|v| outer.contains(v)));
    }

    #[test]
    fn wide_egonet_is_whole_graph(g in connected(25, 0.1f64..=3.0), pick in any::<prop::sample::Index>()) {
        let i = pick.index(g.node_count());
        // the diameter never exceeds n - 1
        let e = extract_egonet(&g, i, g.node_count()).unwrap();
        let mut nodes = e.nodes().to_vec();
        nodes.sort_unstable();
        prop_assert_eq!(nodes, (0..g.node_count()).collect::<Vec<_>>());
        let permuted = induced_subgraph(&g, e.nodes()).unwrap();
        prop_assert_eq!(e.matrix(), permuted.dense_adjacency());
        prop_assert_eq!(e.edge_count(), g.edge_count());
    }

    #[test]
    fn edge_list_round_trip(
        g in signed(30),
        isolated in 0usize..3,
        names in proptest::collection::vec("[a-z][a-z0-9_]{0,6}", 40),
    ) {
        // relabel with arbitrary unique names and tack on isolated nodes
        let mut labels: Vec<String> = Vec::new();
        for (k, name) in names.iter().enumerate() {
            let l = format!("{name}{k}");
            labels.push(l);
        }
        labels.truncate(g.node_count() + isolated);
        let g = Graph::from_labelled_edges(labels, g.edges()).unwrap();
        let text = write_edge_list(&g);
        let (back, _) = parse_edge_list(&text, &ParseOptions::default()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(write_edge_list(&back), text);
    }
}
