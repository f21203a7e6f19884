mod common;

use common::{naive_burt, naive_distance_matrix, random_graph};
use graphqubo::distances::{burt_distance, distance_matrix, Burt, Dissimilarity, DistanceMatrix};
use graphqubo::graph::Graph;
use graphqubo::rng::Xoshiro256StarStar;
use graphqubo::Error;
use proptest::prelude::*;

fn assert_matches_oracle(g: &Graph, tol: f64) {
    let fast = distance_matrix(g);
    let slow = naive_distance_matrix(g);
    for (idx, (&a, &b)) in fast.as_slice().iter().zip(&slow).enumerate() {
        assert!((a - b).abs() <= tol, "entry {idx}: {a} vs {b}");
    }
}

#[test]
fn hand_cases() {
    let k3 = Graph::new(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
    assert!(distance_matrix(&k3).as_slice().iter().all(|&v| v == 0.0));

    let p3 = common::path3();
    let d = distance_matrix(&p3);
    assert_eq!((d.get(0, 1), d.get(1, 2), d.get(0, 2)), (1.0, 1.0, 0.0));

    let star = Graph::new(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
    assert_eq!(burt_distance(&star, 1, 2).unwrap(), 0.0);
    assert_eq!(burt_distance(&star, 0, 1).unwrap(), 2f64.sqrt());
    assert_eq!(naive_burt(&star, 0, 1), 2f64.sqrt());
}

#[test]
fn fifty_random_graphs_match_the_oracle() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(0xd15);
    for case in 0..50 {
        let n = 2 + rng.below(99) as usize;
        let p = rng.next_f64();
        let weighted = case % 5 == 4;
        let g = random_graph(&mut rng, n, p, weighted);
        assert_matches_oracle(&g, 1e-12);
    }
}

#[test]
fn pair_errors() {
    let g = common::path3();
    assert!(matches!(burt_distance(&g, 1, 1), Err(Error::InvalidPair { .. })));
    assert!(matches!(
        burt_distance(&g, 0, 3),
        Err(Error::IndexOutOfRange { index: 3, .. })
    ));
}

#[test]
fn strategy_interface_agrees_with_free_functions() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(4);
    let g = random_graph(&mut rng, 20, 0.3, false);
    assert_eq!(Burt.matrix(&g), distance_matrix(&g));
    assert_eq!(Burt.pair(&g, 3, 7).unwrap(), burt_distance(&g, 3, 7).unwrap());
}

#[test]
fn csv_dump_round_trips_at_full_precision() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(8);
    let g = random_graph(&mut rng, 12, 0.5, true);
    let d = distance_matrix(&g);
    let values: Vec<f64> = d
        .to_csv()
        .lines()
        .flat_map(|l| l.split(',').map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert_eq!(DistanceMatrix::from_row_major(12, values).unwrap(), d);
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = (Graph, u64)> {
    (3usize..max_n, 0.0f64..1.0, any::<bool>(), any::<u64>()).prop_map(|(n, p, weighted, seed)| {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        (random_graph(&mut rng, n, p, weighted), seed)
    })
}

proptest! {
    #[test]
    fn symmetric_nonnegative_zero_diagonal((g, _) in arb_graph(40)) {
        let d = distance_matrix(&g);
        for i in 0..d.n() {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..d.n() {
                prop_assert!(d.get(i, j) >= 0.0);
                prop_assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
    }

    #[test]
    fn toggling_the_pair_edge_leaves_its_distance_alone((g, seed) in arb_graph(30)) {
        let n = g.n_vertices();
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed ^ 1);
        let i = rng.below(n as u64) as usize;
        let j = (i + 1 + rng.below(n as u64 - 1) as usize) % n;
        let mut edges: Vec<(usize, usize, f64)> = g
            .edges()
            .filter(|&(a, b, _)| (a.min(b), a.max(b)) != (i.min(j), i.max(j)))
            .collect();
        if g.weight(i, j) == 0.0 {
            edges.push((i, j, 1.0));
        }
        let toggled = Graph::new(n, &edges).unwrap();
        prop_assert_eq!(burt_distance(&g, i, j).unwrap(), burt_distance(&toggled, i, j).unwrap());
    }

    #[test]
    fn twins_have_zero_distance((g, seed) in arb_graph(30)) {
        // Make vertex 1 copy vertex 0's neighborhood outside {0, 1}.
        let n = g.n_vertices();
        let mut edges: Vec<(usize, usize, f64)> =
            g.edges().filter(|&(a, b, _)| a != 1 && b != 1).collect();
        for l in 2..n {
            let w = g.weight(0, l);
            if w != 0.0 {
                edges.push((1, l, w));
            }
        }
        if seed % 2 == 0 && g.weight(0, 1) == 0.0 {
            edges.push((0, 1, 1.0));
        }
        let twin = Graph::new(n, &edges).unwrap();
        prop_assert_eq!(distance_matrix(&twin).get(0, 1), 0.0);
    }
}
