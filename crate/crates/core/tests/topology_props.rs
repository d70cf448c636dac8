use std::collections::BTreeSet;

use proptest::prelude::*;
use zne_core::topology::{color_edges, heavy_hex_27, longest_chain, validate_path, Topology};

fn graphs() -> impl Strategy<Value = Topology> {
    (2usize..14).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let edges: BTreeSet<(usize, usize)> = pairs
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect();
            Topology::new(n, &edges.into_iter().collect::<Vec<_>>()).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn coloring_classes_are_matchings(top in graphs()) {
        let col = color_edges(&top);
        col.validate(&top).unwrap();
        for class in &col.classes {
            let mut seen = BTreeSet::new();
            for &(a, b) in class {
                prop_assert!(seen.insert(a) && seen.insert(b));
            }
        }
        prop_assert!(col.class_count() <= 2 * top.max_degree().max(1));
        if top.bipartition().is_some() {
            prop_assert_eq!(col.class_count(), top.max_degree());
        }
    }

    #[test]
    fn coloring_is_deterministic(top in graphs()) {
        prop_assert_eq!(color_edges(&top), color_edges(&top.clone()));
    }

    #[test]
    fn induced_subgraphs_keep_only_internal_edges(top in graphs(), keep in prop::collection::vec(any::<bool>(), 14)) {
        let nodes: Vec<usize> = top.nodes().into_iter().filter(|&v| keep[v]).collect();
        let sub = top.induced(&nodes).unwrap();
        for (a, b) in sub.edges() {
            prop_assert!(top.has_edge(a, b) && keep[a] && keep[b]);
        }
        prop_assert_eq!(
            sub.edge_count(),
            top.edges().iter().filter(|&&(a, b)| keep[a] && keep[b]).count()
        );
    }
}

#[test]
fn heavy_hex_shape() {
    let top = heavy_hex_27();
    let degrees: BTreeSet<usize> = top.nodes().into_iter().map(|v| top.degree(v)).collect();
    assert!(degrees.iter().all(|d| (1..=3).contains(d)));
    assert!(top.is_connected());
    assert_eq!(color_edges(&top).class_count(), 3);
    let chain = longest_chain(&top, 21).unwrap();
    validate_path(&top, &chain).unwrap();
}
