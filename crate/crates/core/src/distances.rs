//! Vertex neighborhood dissimilarity.
//!
//! The Burt distance between `i` and `j` is the Euclidean distance between
//! their adjacency rows with columns `i` and `j` removed:
//! `d_ij = sqrt(sum_{l != i, j} (A_il - A_jl)^2)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Symmetric matrix of pairwise dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major `n x n` buffer, checking symmetry, zero diagonal
    /// and non-negativity.
    pub fn from_row_major(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                actual: d.len(),
            });
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "distance diagonal entry {i} is non-zero"
                )));
            }
            for j in (i + 1)..n {
                let v = d[i * n + j];
                if !(v >= 0.0 && v.is_finite()) || v != d[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "distance ({i}, {j}) must be finite, non-negative and symmetric"
                    )));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// Sum of all `d_ij` with `i < j`.
    pub fn upper_sum(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Row-major CSV, full round-trip precision, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 8);
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// A pairwise vertex dissimilarity.
pub trait Dissimilarity: Sync {
    fn name(&self) -> &'static str;

    fn pair(&self, g: &Graph, i: usize, j: usize) -> Result<f64>;

    fn matrix(&self, g: &Graph) -> DistanceMatrix {
        let n = g.n_vertices();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.pair(g, i, j).expect("distinct in-range pair");
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }
}

/// Burt neighborhood distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Burt;

impl Dissimilarity for Burt {
    fn name(&self) -> &'static str {
        "burt"
    }

    fn pair(&self, g: &Graph, i: usize, j: usize) -> Result<f64> {
        burt_distance(g, i, j)
    }

    fn matrix(&self, g: &Graph) -> DistanceMatrix {
        distance_matrix(g)
    }
}

/// Burt distance between two distinct vertices.
pub fn burt_distance(g: &Graph, i: usize, j: usize) -> Result<f64> {
    let n = g.n_vertices();
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    if i == j {
        return Err(Error::InvalidPair { i, j });
    }
    Ok(row_distance(g.row(i), g.row(j), i, j))
}

/// Accumulates in ascending column order, skipping columns `i` and `j`.
#[inline]
fn row_distance(ri: &[f64], rj: &[f64], i: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for (l, (a, b)) in ri.iter().zip(rj).enumerate() {
        if l == i || l == j {
            continue;
        }
        let diff = a - b;
        acc += diff * diff;
    }
    acc.sqrt()
}

/// Packed 0/1 adjacency rows for unweighted graphs.
struct BitRows {
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    fn new(g: &Graph) -> Self {
        let n = g.n_vertices();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            for (l, &w) in g.row(i).iter().enumerate() {
                if w != 0.0 {
                    bits[i * words + l / 64] |= 1 << (l % 64);
                }
            }
        }
        Self { words, bits }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }
}

/// All-pairs Burt distances.
///
/// Unweighted graphs use packed rows: the squared distance is the popcount
/// of `row_i XOR row_j` minus the mismatches in columns `i` and `j`, which
/// is an exact integer. Weighted graphs use the direct floating-point
/// kernel. Rows are computed in parallel; every entry is independent of
/// scheduling.
pub fn distance_matrix(g: &Graph) -> DistanceMatrix {
    let n = g.n_vertices();
    let mut d = vec![0.0; n * n];
    if n == 0 {
        return DistanceMatrix { n, d };
    }

    if g.is_weighted() {
        d.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let ri = g.row(i);
            for (j, slot) in out.iter_mut().enumerate() {
                if j != i {
                    *slot = row_distance(ri, g.row(j), i, j);
                }
            }
        });
    } else {
        let rows = BitRows::new(g);
        d.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let ri = rows.row(i);
            for (j, slot) in out.iter_mut().enumerate() {
                if j == i {
                    continue;
                }
                let rj = rows.row(j);
                let mut count: u32 = ri.iter().zip(rj).map(|(a, b)| (a ^ b).count_ones()).sum();
                // Column i: A_ii = 0, so a mismatch there means A_ji = 1; same for column j.
                let a_ij = g.weight(i, j) != 0.0;
                count -= 2 * u32::from(a_ij);
                *slot = f64::from(count).sqrt();
            }
        });
    }
    DistanceMatrix { n, d }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Graph::new(n, &e).unwrap()
    }

    #[test]
    fn triangle_pairs_are_zero() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(burt_distance(&g, 0, 1).unwrap(), 0.0);
        let d = distance_matrix(&g);
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn path_distances() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(burt_distance(&g, 0, 1).unwrap(), 1.0);
        let d = distance_matrix(&g);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(1, 2), 1.0);
        assert_eq!(d.get(0, 2), 0.0);
    }

    #[test]
    fn star_distances() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(burt_distance(&g, 1, 2).unwrap(), 0.0);
        assert_eq!(burt_distance(&g, 0, 1).unwrap(), 2f64.sqrt());
        let d = distance_matrix(&g);
        assert_eq!(d.get(1, 2), 0.0);
        assert_eq!(d.get(3, 0), 2f64.sqrt());
    }

    #[test]
    fn same_vertex_is_invalid_pair() {
        let g = graph(3, &[(0, 1)]);
        assert!(matches!(burt_distance(&g, 1, 1), Err(Error::InvalidPair { .. })));
        assert!(matches!(burt_distance(&g, 0, 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn weighted_uses_raw_weights() {
        let g = Graph::new(3, &[(0, 2, 3.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(burt_distance(&g, 0, 1).unwrap(), 2.0);
        assert_eq!(distance_matrix(&g).get(1, 0), 2.0);
    }

    #[test]
    fn from_row_major_validates() {
        assert!(DistanceMatrix::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_row_major(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_row_major(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_row_major(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn csv_round_trips_values() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let csv = distance_matrix(&g).to_csv();
        let second: Vec<f64> = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(second, vec![2f64.sqrt(), 0.0, 0.0, 0.0]);
    }
}
