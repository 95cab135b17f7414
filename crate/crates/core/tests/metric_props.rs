use proptest::prelude::*;
use qfa_core::corpus::{random_tree, rng};
use qfa_core::rational::{q, qr};
use qfa_core::{MetricGraph, Q};
use rand::Rng;

fn tree(seed: u64, n: usize) -> MetricGraph {
    random_tree(&mut rng(seed), n)
}

/// A tree plus one edge between two vertices at distance `>= 3`, so the
/// graph contains an isometric cycle of length at least 4.
fn tree_with_long_cycle(seed: u64, n: usize) -> Option<MetricGraph> {
    let t = tree(seed, n);
    let mut r = rng(seed ^ 0x9e37);
    for _ in 0..50 {
        let (u, v) = (r.gen_range(0..n), r.gen_range(0..n));
        if t.units(u, v) >= 3 {
            let mut edges: Vec<(usize, usize)> = t.edges().iter().map(|&(a, b, _)| (a, b)).collect();
            edges.push((u, v));
            return Some(MetricGraph::unit(n, &edges).unwrap());
        }
    }
    None
}

/// Random tree skeleton plus extra chords, all with rational lengths.
fn weighted_graph(seed: u64, n: usize, chords: usize) -> MetricGraph {
    let t = tree(seed, n);
    let mut r = rng(seed ^ 0x51f1);
    let mut len = || qr(r.gen_range(1..=12), r.gen_range(1..=4));
    let mut edges: Vec<(usize, usize, Q)> = t.edges().iter().map(|&(a, b, _)| (a, b, len())).collect();
    let mut r = rng(seed ^ 0x7a3);
    for _ in 0..chords {
        let (u, v) = (r.gen_range(0..n), r.gen_range(0..n));
        if u != v && !edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)) {
            edges.push((u, v, qr(r.gen_range(1..=12), r.gen_range(1..=4))));
        }
    }
    MetricGraph::new(n, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trees_are_zero_hyperbolic(seed in any::<u64>(), n in 1usize..40) {
        let t = tree(seed, n);
        prop_assert!(t.is_tree());
        prop_assert_eq!(t.four_point_delta(None).unwrap().delta, q(0));
        prop_assert!(t.bottleneck_delta().delta <= q(1));
    }

    #[test]
    fn a_long_cycle_breaks_zero_hyperbolicity(seed in any::<u64>(), n in 6usize..30) {
        if let Some(g) = tree_with_long_cycle(seed, n) {
            prop_assert!(!g.is_tree());
            prop_assert!(g.four_point_delta(None).unwrap().delta > q(0));
        }
    }

    #[test]
    fn tripod_within_envelope(seed in any::<u64>(), n in 4usize..18, chords in 0usize..4) {
        let g = MetricGraph::unit(
            n,
            &weighted_graph(seed, n, chords).edges().iter().map(|&(a, b, _)| (a, b)).collect::<Vec<_>>(),
        )
        .unwrap();
        let fp = g.four_point_delta(None).unwrap().delta;
        prop_assert!(g.tripod_delta().delta <= q(4) * fp + q(2));
    }

    #[test]
    fn legs_add_up_to_the_side(seed in any::<u64>(), n in 3usize..25, chords in 0usize..5) {
        let g = weighted_graph(seed, n, chords);
        let mut r = rng(seed);
        for _ in 0..20 {
            let (x, y, z) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n));
            let sum = g.gromov_product(y, z, x).unwrap() + g.gromov_product(x, z, y).unwrap();
            prop_assert_eq!(sum, g.distance(x, y).unwrap());
        }
    }

    #[test]
    fn distances_form_a_metric(seed in any::<u64>(), n in 2usize..25, chords in 0usize..6) {
        let g = weighted_graph(seed, n, chords);
        for x in 0..n {
            prop_assert_eq!(g.units(x, x), 0);
            for y in 0..n {
                prop_assert_eq!(g.units(x, y), g.units(y, x));
                if x != y {
                    prop_assert!(g.units(x, y) > 0);
                }
                for z in 0..n {
                    prop_assert!(g.units(x, z) <= g.units(x, y) + g.units(y, z));
                }
            }
        }
    }

    #[test]
    fn subdivision_preserves_vertex_distances(seed in any::<u64>(), n in 2usize..15, k in 1usize..4) {
        let g = weighted_graph(seed, n, 2);
        let s = g.subdivide(k).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(s.distance(x, y).unwrap(), g.distance(x, y).unwrap());
            }
        }
    }
}

#[test]
fn cycle_bottleneck_grows_with_length() {
    let values: Vec<Q> = (3..=8)
        .map(|n| MetricGraph::cycle(2 * n).unwrap().subdivide(2).unwrap().bottleneck_delta().delta)
        .collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
}

#[test]
fn complete_graphs_are_zero_hyperbolic_without_being_trees() {
    let edges: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
    let k5 = MetricGraph::unit(5, &edges).unwrap();
    assert!(!k5.is_tree());
    assert_eq!(k5.four_point_delta(None).unwrap().delta, q(0));
}
