//! Slow, obviously-correct reference implementations used by the
//! integration tests. Nothing here shares code with the library kernels.
#![allow(dead_code)]

use graphqubo::distances::DistanceMatrix;
use graphqubo::graph::Graph;
use graphqubo::qubo::{Model, ModelParams, QuboProblem};
use graphqubo::rng::Xoshiro256StarStar;

/// Neighborhood dissimilarity straight from its definition.
pub fn naive_burt(g: &Graph, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for l in 0..g.n_vertices() {
        if l == i || l == j {
            continue;
        }
        let diff = g.weight(i, l) - g.weight(j, l);
        s += diff * diff;
    }
    s.sqrt()
}

pub fn naive_distance_matrix(g: &Graph) -> Vec<f64> {
    let n = g.n_vertices();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i * n + j] = naive_burt(g, i, j);
            }
        }
    }
    d
}

/// Penalized objective evaluated term by term, without the QUBO expansion.
pub fn penalty_form_energy(d: &DistanceMatrix, params: &ModelParams, x: &[u8]) -> f64 {
    let n = d.n();
    let k = params.k_clusters;
    let bit = |i: usize, c: usize| x[i * k + c] as f64;

    let mut distance = 0.0;
    for c in 0..k {
        for i in 0..n {
            for j in (i + 1)..n {
                distance += d.get(i, j) * bit(i, c) * bit(j, c);
            }
        }
    }
    let mut one_hot = 0.0;
    for i in 0..n {
        let s: f64 = (0..k).map(|c| bit(i, c)).sum();
        one_hot += (1.0 - s) * (1.0 - s);
    }
    let mut total = distance + params.penalty_p * one_hot;
    if params.model == Model::Model2 {
        let u = params.u_bar.unwrap_or(n as f64 / k as f64);
        for c in 0..k {
            let size: f64 = (0..n).map(|i| bit(i, c)).sum();
            total += params.lambda_reg * (size - u) * (size - u);
        }
    }
    total
}

/// `x^T Q x + offset` with every product spelled out.
pub fn naive_energy(p: &QuboProblem, x: &[u8]) -> f64 {
    let n = p.n_vars();
    let mut e = p.offset();
    for u in 0..n {
        for v in 0..n {
            e += p.coeff(u, v) * x[u] as f64 * x[v] as f64;
        }
    }
    e
}

/// Minimum energy over all `2^n` states by full re-evaluation.
pub fn brute_force_min(p: &QuboProblem) -> (f64, Vec<Vec<u8>>) {
    let n = p.n_vars();
    let mut best = f64::INFINITY;
    let mut states = Vec::new();
    for idx in 0u64..(1 << n) {
        let x: Vec<u8> = (0..n).map(|b| ((idx >> b) & 1) as u8).collect();
        let e = naive_energy(p, &x);
        let tol = if best.is_finite() {
            1e-9 * best.abs().max(1.0)
        } else {
            0.0
        };
        if e < best - tol {
            best = e;
            states.clear();
            states.push(x);
        } else if e <= best + tol {
            states.push(x);
        }
    }
    states.sort();
    (best, states)
}

/// Adjusted Rand index from raw pair counts.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_a * only_b) / denom
}

/// Erdos-Renyi graph, optionally with weights in (0.5, 2).
pub fn random_graph(rng: &mut Xoshiro256StarStar, n: usize, p: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                let w = if weighted { rng.uniform(0.5, 2.0) } else { 1.0 };
                edges.push((i, j, w));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

pub fn random_state(rng: &mut Xoshiro256StarStar, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.next_bool() as u8).collect()
}

/// Random symmetric distance matrix with entries in [0, scale).
pub fn random_distances(rng: &mut Xoshiro256StarStar, n: usize, scale: f64) -> DistanceMatrix {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.uniform(0.0, scale);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix::from_row_major(n, d).unwrap()
}

pub fn path3() -> Graph {
    Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
}
