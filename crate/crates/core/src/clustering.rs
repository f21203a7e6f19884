//! Decoding annealer states into labelings, plus clustering quality metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::qubo::SpinState;

/// Vertex to cluster labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&c| c >= k) {
            return Err(Error::InvalidParameter(format!(
                "cluster label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn encode(&self) -> SpinState {
        crate::qubo::encode_labels(&self.labels, self.k)
    }

    /// `vertex,cluster` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,cluster\n");
        for (i, c) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i},{c}");
        }
        out
    }
}

/// How rows that are not exactly one-hot are handled.
#[derive(Debug, Clone, Copy)]
pub enum DecodePolicy<'a> {
    Strict,
    /// Distance-greedy repair: multi-bit vertices keep their cheapest set
    /// cluster, empty vertices join their cheapest cluster overall, where
    /// cost is the summed distance to the cluster's current members.
    Repair(&'a DistanceMatrix),
}

/// Per-vertex one-hot status of a state, tallied during decoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub unassigned: usize,
    pub multi_assigned: usize,
}

impl Violations {
    pub fn is_feasible(&self) -> bool {
        self.unassigned == 0 && self.multi_assigned == 0
    }
}

/// Counts vertices whose row of `x` is not exactly one-hot.
pub fn one_hot_violations(x: &[u8], n: usize, k: usize) -> Result<Violations> {
    check_state_len(x, n, k)?;
    let mut v = Violations::default();
    for row in x.chunks(k) {
        match row.iter().filter(|&&b| b != 0).count() {
            0 => v.unassigned += 1,
            1 => {}
            _ => v.multi_assigned += 1,
        }
    }
    Ok(v)
}

fn check_state_len(x: &[u8], n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if x.len() != n * k {
        return Err(Error::Dimension {
            expected: n * k,
            actual: x.len(),
        });
    }
    Ok(())
}

pub fn decode(x: &[u8], n: usize, k: usize, policy: DecodePolicy<'_>) -> Result<Assignment> {
    check_state_len(x, n, k)?;
    let set_clusters = |i: usize| -> Vec<usize> { (0..k).filter(|&c| x[i * k + c] != 0).collect() };

    match policy {
        DecodePolicy::Strict => {
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                let set = set_clusters(i);
                if set.len() != 1 {
                    return Err(Error::ConstraintViolation {
                        vertex: i,
                        set_bits: set.len(),
                    });
                }
                labels.push(set[0]);
            }
            Ok(Assignment { labels, k })
        }
        DecodePolicy::Repair(d) => {
            if d.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: d.n(),
                });
            }
            let mut labels: Vec<Option<usize>> = vec![None; n];
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
            let mut multi = Vec::new();
            let mut empty = Vec::new();
            for (i, label) in labels.iter_mut().enumerate() {
                let set = set_clusters(i);
                match set.len() {
                    1 => {
                        *label = Some(set[0]);
                        members[set[0]].push(i);
                    }
                    0 => empty.push(i),
                    _ => multi.push((i, set)),
                }
            }
            let cost =
                |members: &[Vec<usize>], i: usize, c: usize| -> f64 { members[c].iter().map(|&j| d.get(i, j)).sum() };
            // Strict `<` keeps the lowest cluster id on ties.
            let cheapest = |members: &[Vec<usize>], i: usize, candidates: &mut dyn Iterator<Item = usize>| {
                let mut best: Option<(usize, f64)> = None;
                for c in candidates {
                    let cst = cost(members, i, c);
                    if best.map_or(true, |(_, b)| cst < b) {
                        best = Some((c, cst));
                    }
                }
                best.map(|(c, _)| c).expect("at least one candidate cluster")
            };
            for (i, set) in multi {
                let c = cheapest(&members, i, &mut set.into_iter());
                labels[i] = Some(c);
                members[c].push(i);
            }
            for i in empty {
                let c = cheapest(&members, i, &mut (0..k));
                labels[i] = Some(c);
                members[c].push(i);
            }
            Ok(Assignment {
                labels: labels.into_iter().map(|l| l.expect("every vertex labeled")).collect(),
                k,
            })
        }
    }
}

/// Sum of intra-cluster distances, `sum_{i<j} d_ij [c_i == c_j]`.
pub fn objective_value(d: &DistanceMatrix, a: &Assignment) -> Result<f64> {
    let n = a.len();
    if d.n() != n {
        return Err(Error::Dimension {
            expected: d.n(),
            actual: n,
        });
    }
    let labels = a.labels();
    let mut total = 0.0;
    for i in 0..n {
        let row = d.row(i);
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                total += row[j];
            }
        }
    }
    Ok(total)
}

/// Adjusted Rand index between two partitions of the same vertex set.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len() as f64;
    let comb2 = |x: f64| x * (x - 1.0) / 2.0;

    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| comb2(c as f64)).sum();
    let sum_a: f64 = rows.values().map(|&c| comb2(c as f64)).sum();
    let sum_b: f64 = cols.values().map(|&c| comb2(c as f64)).sum();
    let total = comb2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        // Only reachable when both partitions are all singletons or both a
        // single block.
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyThresholds {
    /// A cluster holding at least this fraction of all vertices is a mega-cluster.
    pub mega_fraction: f64,
    /// Non-empty clusters with at most this many vertices are micro-clusters.
    pub micro_max_size: usize,
}

impl Default for DegeneracyThresholds {
    fn default() -> Self {
        Self {
            mega_fraction: 0.9,
            micro_max_size: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub mega_cluster_flag: bool,
    pub micro_cluster_count: usize,
}

pub fn degeneracy_report(a: &Assignment, thresholds: DegeneracyThresholds) -> DegeneracyReport {
    let n = a.len() as f64;
    let sizes = a.cluster_sizes();
    DegeneracyReport {
        mega_cluster_flag: n > 0.0 && sizes.iter().any(|&s| s as f64 >= thresholds.mega_fraction * n),
        micro_cluster_count: sizes
            .iter()
            .filter(|&&s| s > 0 && s <= thresholds.micro_max_size)
            .count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub objective: f64,
    pub cluster_sizes: Vec<usize>,
    pub ari_vs_planted: Option<f64>,
    pub mega_cluster_flag: bool,
    pub micro_cluster_count: usize,
}

pub fn cluster_metrics(
    d: &DistanceMatrix,
    a: &Assignment,
    planted: Option<&[usize]>,
    thresholds: DegeneracyThresholds,
) -> Result<ClusterMetrics> {
    let objective = objective_value(d, a)?;
    let ari_vs_planted = planted.map(|p| adjusted_rand_index(a.labels(), p)).transpose()?;
    let deg = degeneracy_report(a, thresholds);
    Ok(ClusterMetrics {
        objective,
        cluster_sizes: a.cluster_sizes(),
        ari_vs_planted,
        mega_cluster_flag: deg.mega_cluster_flag,
        micro_cluster_count: deg.micro_cluster_count,
    })
}
