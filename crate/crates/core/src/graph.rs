//! Dense undirected graphs, stochastic-block-model generation and the
//! edge-list file format.
//!
//! Edge-list format: a header line `n <N>` fixes the vertex count, followed
//! by one edge per line as whitespace-separated `i j [weight]`. Text after
//! `#` is a comment; blank lines are ignored. A graph is weighted when any
//! edge line carries a weight.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;

/// Undirected simple graph with dense symmetric adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<f64>,
    weighted: bool,
}

impl Graph {
    /// Builds a graph from an edge list. Weights must be positive; pass
    /// `1.0` for unweighted edges.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j, w) in edges {
            g.insert_edge(i, j, w)?;
            if w != 1.0 {
                g.weighted = true;
            }
        }
        Ok(g)
    }

    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![0.0; n * n],
            weighted: false,
        }
    }

    fn insert_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        for index in [i, j] {
            if index >= self.n {
                return Err(Error::IndexOutOfRange { index, n: self.n });
            }
        }
        if i == j {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: "self-loop",
            });
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidEdge {
                i,
                j,
                reason: "weight must be positive and finite",
            });
        }
        if self.adjacency[i * self.n + j] != 0.0 {
            return Err(Error::DuplicateEdge { i, j });
        }
        self.adjacency[i * self.n + j] = w;
        self.adjacency[j * self.n + i] = w;
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i * self.n + j]
    }

    /// Adjacency row of vertex `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.adjacency[i * self.n..(i + 1) * self.n]
    }

    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    /// Edges `(i, j, w)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&w| w != 0.0).count()
    }

    /// Reads a graph in edge-list format.
    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text)
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some(g) = graph.as_mut() else {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(Error::Format(format!(
                        "line {line_no}: expected header `n <vertices>` before any edge"
                    )));
                }
                let n = fields[1].parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid vertex count `{}`", fields[1]),
                })?;
                graph = Some(Graph::empty(n));
                continue;
            };
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `i j [weight]`, found `{line}`"),
                });
            }
            let parse_vertex = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid vertex index `{s}`"),
                })
            };
            let i = parse_vertex(fields[0])?;
            let j = parse_vertex(fields[1])?;
            let w = match fields.get(2) {
                Some(s) => {
                    g.weighted = true;
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid weight `{s}`"),
                    })?
                }
                None => 1.0,
            };
            g.insert_edge(i, j, w).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        graph.ok_or_else(|| Error::Format("missing `n <vertices>` header".into()))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (i, j, w) in self.edges() {
            if self.weighted {
                // `{}` on f64 prints the shortest representation that round-trips.
                let _ = writeln!(out, "{i} {j} {w}");
            } else {
                let _ = writeln!(out, "{i} {j}");
            }
        }
        out
    }
}

/// Parameters of a stochastic block model with per-block-pair edge
/// probabilities drawn uniformly from the given ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub intra_prob_range: (f64, f64),
    pub inter_prob_range: (f64, f64),
    pub seed: u64,
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() {
            return Err(Error::InvalidParameter("block_sizes is empty".into()));
        }
        if self.block_sizes.contains(&0) {
            return Err(Error::InvalidParameter(
                "every block must hold at least one vertex".into(),
            ));
        }
        for (name, (lo, hi)) in [
            ("intra_prob_range", self.intra_prob_range),
            ("inter_prob_range", self.inter_prob_range),
        ] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} ({lo}, {hi}) must satisfy 0 <= lo <= hi <= 1"
                )));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn n_blocks(&self) -> usize {
        self.block_sizes.len()
    }
}

/// A generated graph together with the block each vertex was planted in.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
    /// Probability drawn for each unordered block pair, row-major `K x K`.
    pub block_probs: Vec<f64>,
}

/// Samples a stochastic block model graph.
///
/// Draw order (fixed, so other implementations can reproduce it): one
/// probability per unordered block pair `(a, b)`, `a <= b`, in row-major
/// order, then one uniform per vertex pair `(i, j)`, `i < j`, row-major; the
/// edge exists when the uniform is below the pair's block probability.
pub fn generate_sbm(spec: &SbmSpec) -> Result<PlantedGraph> {
    spec.validate()?;
    let k = spec.n_blocks();
    let n = spec.n_vertices();
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);

    let mut block_probs = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let (lo, hi) = if a == b {
                spec.intra_prob_range
            } else {
                spec.inter_prob_range
            };
            let p = rng.uniform(lo, hi);
            block_probs[a * k + b] = p;
            block_probs[b * k + a] = p;
        }
    }

    let labels: Vec<usize> = spec
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat(b).take(size))
        .collect();

    let mut graph = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = block_probs[labels[i] * k + labels[j]];
            if rng.next_f64() < p {
                graph.adjacency[i * n + j] = 1.0;
                graph.adjacency[j * n + i] = 1.0;
            }
        }
    }

    Ok(PlantedGraph {
        graph,
        labels,
        block_probs,
    })
}

/// Splits `n` vertices into `k` blocks whose sizes differ by at most one,
/// larger blocks first.
pub fn near_equal_blocks(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    (0..k).map(|b| base + usize::from(b < extra)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn path_graph_construction() {
        let g = p3();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert_eq!(g.weight(0, 2), 0.0);
        assert!(!g.is_weighted());
        assert_eq!(g.n_edges(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            Graph::new(3, &[(0, 0, 1.0)]),
            Err(Error::InvalidEdge { i: 0, j: 0, .. })
        ));
    }

    #[test]
    fn duplicate_rejected_in_either_orientation() {
        assert!(matches!(
            Graph::new(3, &[(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            Graph::new(2, &[(0, 2, 1.0)]),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn non_positive_weight_rejected() {
        assert!(Graph::new(2, &[(0, 1, 0.0)]).is_err());
        assert!(Graph::new(2, &[(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn edgeless_graph() {
        let g = Graph::new(2, &[]).unwrap();
        assert!(g.row(0).iter().chain(g.row(1)).all(|&w| w == 0.0));
    }

    #[test]
    fn parse_path() {
        let g = Graph::parse_edge_list("n 3\n0 1\n1 2").unwrap();
        assert_eq!(g, p3());
    }

    #[test]
    fn parse_self_loop_reports_line() {
        match Graph::parse_edge_list("n 2\n0 0") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_missing_header() {
        assert!(matches!(Graph::parse_edge_list("0 1\n"), Err(Error::Format(_))));
        assert!(matches!(Graph::parse_edge_list("# nothing\n"), Err(Error::Format(_))));
    }

    #[test]
    fn parse_comments_and_weights() {
        let g = Graph::parse_edge_list("# header\nn 3 # three\n\n0 1 2.5\n1 2 0.5 # w\n").unwrap();
        assert!(g.is_weighted());
        assert_eq!(g.weight(1, 0), 2.5);
        assert_eq!(g.weight(2, 1), 0.5);
    }

    #[test]
    fn parse_garbage_line() {
        assert!(matches!(
            Graph::parse_edge_list("n 3\n0 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Graph::parse_edge_list("n 3\n0 1 1 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn weighted_round_trip() {
        let g = Graph::new(4, &[(0, 1, 0.1), (2, 3, 1.0 / 3.0), (1, 3, 7.0)]).unwrap();
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn sbm_degenerate_ranges_give_disjoint_cliques() {
        let planted = generate_sbm(&SbmSpec {
            block_sizes: vec![10, 10],
            intra_prob_range: (1.0, 1.0),
            inter_prob_range: (0.0, 0.0),
            seed: 3,
        })
        .unwrap();
        let g = &planted.graph;
        for i in 0..20 {
            for j in 0..20 {
                let expected = if i != j && planted.labels[i] == planted.labels[j] {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(g.weight(i, j), expected);
            }
        }
        assert_eq!(g.n_edges(), 2 * 45);
    }

    #[test]
    fn sbm_is_deterministic() {
        let spec = SbmSpec {
            block_sizes: vec![62, 62, 62, 61],
            intra_prob_range: (0.9, 1.0),
            inter_prob_range: (0.0, 0.2),
            seed: 11,
        };
        let a = generate_sbm(&spec).unwrap();
        let b = generate_sbm(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graph.n_vertices(), 247);
        assert_eq!(a.labels.iter().max(), Some(&3));
    }

    #[test]
    fn sbm_block_probabilities_in_range() {
        let spec = SbmSpec {
            block_sizes: vec![5; 8],
            intra_prob_range: (0.7, 1.0),
            inter_prob_range: (0.0, 0.55),
            seed: 5,
        };
        let planted = generate_sbm(&spec).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let p = planted.block_probs[a * 8 + b];
                assert_eq!(p, planted.block_probs[b * 8 + a]);
                if a == b {
                    assert!((0.7..1.0).contains(&p));
                } else {
                    assert!((0.0..0.55).contains(&p));
                }
            }
        }
    }

    #[test]
    fn sbm_spec_validation() {
        let mut spec = SbmSpec {
            block_sizes: vec![3, 0],
            intra_prob_range: (0.5, 0.6),
            inter_prob_range: (0.0, 0.1),
            seed: 0,
        };
        assert!(spec.validate().is_err());
        spec.block_sizes = vec![3, 3];
        spec.intra_prob_range = (0.7, 0.6);
        assert!(spec.validate().is_err());
        spec.intra_prob_range = (0.6, 1.2);
        assert!(spec.validate().is_err());
        spec.intra_prob_range = (0.6, 1.0);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn near_equal_splits() {
        assert_eq!(near_equal_blocks(247, 4), vec![62, 62, 62, 61]);
        assert_eq!(near_equal_blocks(122, 8), vec![16, 16, 15, 15, 15, 15, 15, 15]);
        assert_eq!(near_equal_blocks(120, 8), vec![15; 8]);
    }
}
