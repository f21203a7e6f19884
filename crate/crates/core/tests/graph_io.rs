mod common;

use graphqubo::bench::preset_graph;
use graphqubo::graph::{generate_sbm, Graph, SbmSpec};
use graphqubo::Error;
use proptest::prelude::*;

fn densities(spec: &SbmSpec) -> (f64, f64, f64, f64) {
    let planted = generate_sbm(spec).unwrap();
    let (g, labels) = (&planted.graph, &planted.labels);
    let (mut intra_edges, mut intra_pairs, mut inter_edges, mut inter_pairs) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..g.n_vertices() {
        for j in (i + 1)..g.n_vertices() {
            let e = g.weight(i, j);
            if labels[i] == labels[j] {
                intra_edges += e;
                intra_pairs += 1.0;
            } else {
                inter_edges += e;
                inter_pairs += 1.0;
            }
        }
    }
    (intra_edges, intra_pairs, inter_edges, inter_pairs)
}

#[test]
fn sbm_densities_concentrate() {
    let (p_in, p_out) = (0.9, 0.1);
    let (mut e_in, mut n_in, mut e_out, mut n_out) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..100 {
        let spec = SbmSpec {
            block_sizes: vec![50, 50],
            intra_prob_range: (p_in, p_in),
            inter_prob_range: (p_out, p_out),
            seed,
        };
        let (a, b, c, d) = densities(&spec);
        let (din, dout) = (a / b, c / d);
        assert!((0.84..=0.96).contains(&din), "seed {seed}: intra density {din}");
        assert!((0.06..=0.14).contains(&dout), "seed {seed}: inter density {dout}");
        e_in += a;
        n_in += b;
        e_out += c;
        n_out += d;
    }
    // Pooled over all seeds, within three binomial standard deviations.
    let sd_in = (p_in * (1.0 - p_in) / n_in).sqrt();
    let sd_out = (p_out * (1.0 - p_out) / n_out).sqrt();
    assert!((e_in / n_in - p_in).abs() <= 3.0 * sd_in, "{}", e_in / n_in);
    assert!((e_out / n_out - p_out).abs() <= 3.0 * sd_out, "{}", e_out / n_out);
}

#[test]
fn sbm_is_seed_deterministic() {
    let spec = preset_graph("H8", 11).unwrap().sbm;
    let a = generate_sbm(&spec).unwrap();
    let b = generate_sbm(&spec).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.block_probs, b.block_probs);
    let other = generate_sbm(&SbmSpec { seed: 12, ..spec }).unwrap();
    assert_ne!(a.graph, other.graph);
}

#[test]
fn block_probabilities_respect_ranges() {
    let spec = preset_graph("VH8", 3).unwrap().sbm;
    let planted = generate_sbm(&spec).unwrap();
    let k = spec.n_blocks();
    for a in 0..k {
        for b in 0..k {
            let p = planted.block_probs[a * k + b];
            assert_eq!(p, planted.block_probs[b * k + a]);
            let (lo, hi) = if a == b {
                spec.intra_prob_range
            } else {
                spec.inter_prob_range
            };
            assert!(p >= lo && p <= hi, "({a},{b}) = {p}");
        }
    }
}

#[test]
fn l4_shaped_graph_round_trips_through_a_file() {
    let g = generate_sbm(&preset_graph("L4", 0).unwrap().sbm).unwrap().graph;
    assert_eq!(g.n_vertices(), 247);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l4.txt");
    g.save_edge_list(&path).unwrap();
    assert_eq!(Graph::load_edge_list(&path).unwrap(), g);
}

#[test]
fn parse_errors_are_specific() {
    let err = Graph::parse_edge_list("n 3\n0 1\n2 2\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    let err = Graph::parse_edge_list("0 1\n").unwrap_err();
    assert!(matches!(err, Error::Format(_)), "{err}");
    let err = Graph::parse_edge_list("n 3\n0 1\n1 0\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    let err = Graph::parse_edge_list("n 3\n0 5\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let g = Graph::parse_edge_list("# comment\nn 3 # header\n\n0 1 # edge\n").unwrap();
    assert_eq!(g.n_edges(), 1);
    assert!(matches!(Graph::load_edge_list("/no/such/file"), Err(Error::Io { .. })));
}

#[test]
fn invalid_sbm_specs_are_rejected() {
    let base = SbmSpec {
        block_sizes: vec![3, 3],
        intra_prob_range: (0.5, 0.9),
        inter_prob_range: (0.0, 0.1),
        seed: 0,
    };
    assert!(generate_sbm(&base).is_ok());
    for bad in [
        SbmSpec {
            block_sizes: vec![],
            ..base.clone()
        },
        SbmSpec {
            intra_prob_range: (0.9, 0.5),
            ..base.clone()
        },
        SbmSpec {
            inter_prob_range: (-0.1, 0.1),
            ..base.clone()
        },
        SbmSpec {
            intra_prob_range: (0.5, 1.5),
            ..base.clone()
        },
    ] {
        assert!(matches!(generate_sbm(&bad), Err(Error::InvalidParameter(_))), "{bad:?}");
    }
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..24, any::<bool>())
        .prop_flat_map(|(n, weighted)| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                Just(weighted),
                proptest::collection::vec((any::<bool>(), 0.01f64..100.0), pairs),
            )
        })
        .prop_map(|(n, weighted, picks)| {
            let mut edges = Vec::new();
            let mut it = picks.into_iter();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (present, w) = it.next().unwrap();
                    if present {
                        edges.push((i, j, if weighted { w } else { 1.0 }));
                    }
                }
            }
            Graph::new(n, &edges).unwrap()
        })
}

proptest! {
    #[test]
    fn edge_list_round_trip(g in arb_graph()) {
        let text = g.to_edge_list();
        let back = Graph::parse_edge_list(&text).unwrap();
        // An unweighted-looking weighted graph (all weights 1) may come back unweighted;
        // adjacency must match exactly either way.
        prop_assert_eq!(back.n_vertices(), g.n_vertices());
        for i in 0..g.n_vertices() {
            prop_assert_eq!(back.row(i), g.row(i));
        }
    }

    #[test]
    fn adjacency_is_symmetric(g in arb_graph()) {
        let n = g.n_vertices();
        let mut edges = 0;
        for i in 0..n {
            prop_assert_eq!(g.weight(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(g.weight(i, j), g.weight(j, i));
                if i < j && g.weight(i, j) != 0.0 {
                    edges += 1;
                }
            }
        }
        prop_assert_eq!(edges, g.n_edges());
    }
}
