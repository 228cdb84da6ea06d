mod common;

use proptest::prelude::*;

use wsls_core::graph::{
    build_caterpillar, build_complete, build_cycle, build_random_regular, expansion_constant, expansion_upper_estimate,
    Graph,
};
use wsls_core::{Error, Ratio};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (3usize..=9).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
            let edges: Vec<(usize, usize)> = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expansion_matches_subset_enumeration(g in arb_graph(), a in 1usize..4, extra in 0usize..3) {
        let n = g.node_count();
        let beta = (a + extra).min(n - 1);
        let alpha = a.min(beta);
        let got = expansion_constant(&g, alpha, beta);
        let has_volume = g.edge_count() > 0;
        prop_assume!(has_volume);
        let (num, den) = common::naive_expansion(n, g.edges(), alpha, beta);
        let h = got.unwrap();
        prop_assert!(h.exact);
        prop_assert_eq!(h.value, Ratio::new(num, den));
        prop_assert!(h.set.len() >= alpha && h.set.len() <= beta);
    }

    #[test]
    fn upper_estimate_never_beats_exact(g in arb_graph(), seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let n = g.node_count();
        let exact = expansion_constant(&g, 1, n - 1).unwrap();
        let est = expansion_upper_estimate(&g, 1, n - 1, 200, seed).unwrap();
        prop_assert!(!est.exact);
        prop_assert!(est.value >= exact.value);
    }

    #[test]
    fn relabelling_preserves_structure(g in arb_graph(), seed in any::<u64>()) {
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = g.relabel(&perm).unwrap();
        prop_assert!(h.is_consistent());
        prop_assert_eq!(h.edge_count(), g.edge_count());
        let mut a = g.degrees();
        let mut b = h.degrees();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        for &(u, v) in g.edges() {
            prop_assert!(h.find_edge(perm[u], perm[v]).is_some());
        }
    }

    #[test]
    fn edge_list_round_trips(g in arb_graph()) {
        let back = Graph::from_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn random_regular_is_simple_and_regular(half in 3usize..12, d in 1usize..5, seed in any::<u64>()) {
        let n = 2 * half;
        let g = build_random_regular(n, d, seed).unwrap();
        prop_assert!(g.is_consistent());
        prop_assert!(g.degrees().iter().all(|&k| k == d));
        prop_assert_eq!(g.edge_count(), n * d / 2);
    }

    #[test]
    fn caterpillar_counts(n in 1usize..8, d in 3usize..20) {
        let (g, layout) = build_caterpillar(n, d).unwrap();
        prop_assert_eq!(g.node_count(), n * (d - 1) + 2);
        prop_assert!(g.is_tree());
        prop_assert_eq!(layout.star_count(), n);
        for s in 0..n {
            let root = layout.root(s);
            prop_assert_eq!(g.degree(root), d);
            prop_assert_eq!(layout.counted_leaves(s).len(), d - 2);
            let (x, y) = layout.external_pair(s);
            prop_assert!(g.find_edge(root, x).is_some() && g.find_edge(root, y).is_some());
            for &leaf in layout.counted_leaves(s) {
                prop_assert_eq!(g.degree(leaf), 1);
                prop_assert!(leaf != x && leaf != y);
            }
        }
    }
}

#[test]
fn family_edge_counts() {
    for n in 3..20 {
        let c = build_cycle(n).unwrap();
        assert_eq!(c.edge_count(), n);
        assert!(c.degrees().iter().all(|&d| d == 2));
        let k = build_complete(n).unwrap();
        assert_eq!(k.edge_count(), n * (n - 1) / 2);
    }
}

#[test]
fn known_expansion_constants() {
    let k10 = build_complete(10).unwrap();
    assert_eq!(expansion_constant(&k10, 2, 5).unwrap().value, Ratio::new(5, 9));
    let c8 = build_cycle(8).unwrap();
    let h = expansion_constant(&c8, 2, 4).unwrap();
    assert_eq!(h.value, Ratio::new(1, 4));
    assert!(h.value <= Ratio::new(1, 2));
}

#[test]
fn impossible_regular_graphs_are_rejected() {
    assert!(build_random_regular(5, 3, 1).is_err());
    assert!(build_random_regular(4, 4, 1).is_err());
    assert!(matches!(build_random_regular(7, 3, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn oversized_expansion_is_a_size_limit() {
    let g = build_cycle(80).unwrap();
    assert!(matches!(expansion_constant(&g, 10, 40), Err(Error::SizeLimit { .. })));
}
