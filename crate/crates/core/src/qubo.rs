//! Compilation of the clustering models into dense QUBO form.
//!
//! Energy convention for a symmetric coefficient matrix `q` and offset `c`:
//!
//! ```text
//! E(x) = sum_v q[v][v] x_v + sum_{u<v} 2 q[u][v] x_u x_v + c
//! ```
//!
//! so a pair term `a * x_u * x_v` is stored as `a / 2` in both `q[u][v]` and
//! `q[v][u]`. Flipping bit `v` changes the energy by
//! `(1 - 2 x_v) * (q[v][v] + 2 sum_{u != v} q[v][u] x_u)`.
//!
//! Variables are vertex-major: vertex `i` in cluster `k` is `v = i * K + k`.

use std::fmt;
use std::fs;
use std::ops::{Deref, DerefMut};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};

/// Default variable cap, the capacity of second-generation annealing hardware.
pub const DEFAULT_MAX_VARS: usize = 8192;

pub const DEFAULT_PENALTY: f64 = 16.0;
pub const DEFAULT_LAMBDA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Intra-cluster distance plus one-hot penalties.
    Model1,
    /// Model 1 plus the cluster-size regularizer.
    Model2,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Model1 => "model1",
            Model::Model2 => "model2",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "model1" | "1" | "m1" => Ok(Model::Model1),
            "model2" | "2" | "m2" => Ok(Model::Model2),
            _ => Err(Error::InvalidParameter(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub k_clusters: usize,
    #[serde(default = "default_penalty")]
    pub penalty_p: f64,
    #[serde(default = "default_lambda")]
    pub lambda_reg: f64,
    /// Target cluster size; `None` means `N / K` (kept fractional).
    #[serde(default)]
    pub u_bar: Option<f64>,
}

fn default_penalty() -> f64 {
    DEFAULT_PENALTY
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

impl ModelParams {
    pub fn new(model: Model, k_clusters: usize) -> Self {
        Self {
            model,
            k_clusters,
            penalty_p: DEFAULT_PENALTY,
            lambda_reg: DEFAULT_LAMBDA,
            u_bar: None,
        }
    }

    pub fn model1(k_clusters: usize) -> Self {
        Self::new(Model::Model1, k_clusters)
    }

    pub fn model2(k_clusters: usize) -> Self {
        Self::new(Model::Model2, k_clusters)
    }

    pub fn with_penalty(mut self, p: f64) -> Self {
        self.penalty_p = p;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_reg = lambda;
        self
    }

    pub fn with_u_bar(mut self, u_bar: f64) -> Self {
        self.u_bar = Some(u_bar);
        self
    }

    /// `K >= 1` is accepted so the single-cluster case can be evaluated;
    /// clustering runs use `K >= 2`.
    pub fn validate(&self) -> Result<()> {
        if self.k_clusters == 0 {
            return Err(Error::InvalidParameter("k_clusters must be >= 1".into()));
        }
        if !(self.penalty_p > 0.0 && self.penalty_p.is_finite()) {
            return Err(Error::InvalidParameter("penalty_p must be positive".into()));
        }
        if self.model == Model::Model2 {
            if !(self.lambda_reg > 0.0 && self.lambda_reg.is_finite()) {
                return Err(Error::InvalidParameter("Model2 requires lambda_reg > 0".into()));
            }
            if let Some(u) = self.u_bar {
                if !(u > 0.0 && u.is_finite()) {
                    return Err(Error::InvalidParameter("u_bar must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Target cluster size for an `n`-vertex graph.
    pub fn resolved_u_bar(&self, n: usize) -> f64 {
        self.u_bar.unwrap_or(n as f64 / self.k_clusters as f64)
    }
}

/// Vertex-major mapping between `(vertex, cluster)` and variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMap {
    pub n_vertices: usize,
    pub k_clusters: usize,
}

impl IndexMap {
    #[inline]
    pub fn var(&self, vertex: usize, cluster: usize) -> usize {
        vertex * self.k_clusters + cluster
    }

    #[inline]
    pub fn vertex_cluster(&self, var: usize) -> (usize, usize) {
        (var / self.k_clusters, var % self.k_clusters)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vertices * self.k_clusters
    }
}

/// Binary assignment to every QUBO variable, stored as 0/1 bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpinState(pub Vec<u8>);

impl SpinState {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| u8::from(b)).collect())
    }

    /// Bit `v` is the `v`-th bit of `value` (least significant first).
    pub fn from_index(value: u64, n: usize) -> Self {
        Self((0..n).map(|v| ((value >> v) & 1) as u8).collect())
    }

    #[inline]
    pub fn flip(&mut self, v: usize) {
        self.0[v] ^= 1;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }
}

impl Deref for SpinState {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl DerefMut for SpinState {
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b != 0 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SpinState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!(
                    "spin state contains `{other}`, expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(SpinState)
    }
}

impl Serialize for SpinState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpinState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense symmetric QUBO with a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n_vars: usize,
    q: Vec<f64>,
    offset: f64,
    index_map: Option<IndexMap>,
    params: Option<ModelParams>,
}

impl QuboProblem {
    /// Wraps a dense row-major matrix; `q` must be symmetric.
    pub fn from_dense(n_vars: usize, q: Vec<f64>, offset: f64) -> Result<Self> {
        if q.len() != n_vars * n_vars {
            return Err(Error::Dimension {
                expected: n_vars * n_vars,
                actual: q.len(),
            });
        }
        let p = Self {
            n_vars,
            q,
            offset,
            index_map: None,
            params: None,
        };
        if let Some((u, v)) = p.asymmetry() {
            return Err(Error::InvalidParameter(format!(
                "coefficient matrix not symmetric at ({u}, {v})"
            )));
        }
        if p.q.iter().any(|c| !c.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(p)
    }

    fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.n_vars;
        (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .find(|&(u, v)| self.q[u * n + v] != self.q[v * n + u])
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn index_map(&self) -> Option<IndexMap> {
        self.index_map
    }

    pub fn params(&self) -> Option<&ModelParams> {
        self.params.as_ref()
    }

    #[inline]
    pub fn coeff(&self, u: usize, v: usize) -> f64 {
        self.q[u * self.n_vars + v]
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[f64] {
        &self.q[v * self.n_vars..(v + 1) * self.n_vars]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.q
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.q.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_len(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n_vars {
            return Err(Error::Dimension {
                expected: self.n_vars,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Full energy evaluation.
    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let set: Vec<usize> = (0..self.n_vars).filter(|&v| x[v] != 0).collect();
        let mut e = 0.0;
        for (a, &u) in set.iter().enumerate() {
            let row = self.row(u);
            e += row[u];
            for &v in &set[a + 1..] {
                e += 2.0 * row[v];
            }
        }
        e + self.offset
    }

    /// Energy change from flipping bit `v`, using one matrix row.
    pub fn delta_energy(&self, x: &[u8], v: usize) -> Result<f64> {
        self.check_len(x)?;
        if v >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                index: v,
                n: self.n_vars,
            });
        }
        Ok(self.delta_unchecked(x, v))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, x: &[u8], v: usize) -> f64 {
        let row = self.row(v);
        let mut field = 0.0;
        for (u, (&c, &b)) in row.iter().zip(x).enumerate() {
            if b != 0 && u != v {
                field += c;
            }
        }
        let sign = if x[v] != 0 { -1.0 } else { 1.0 };
        sign * (row[v] + 2.0 * field)
    }

    /// `h[v] = sum_{u != v} q[v][u] x_u` for every variable.
    pub(crate) fn local_fields(&self, x: &[u8]) -> Vec<f64> {
        (0..self.n_vars)
            .map(|v| {
                self.row(v)
                    .iter()
                    .zip(x)
                    .enumerate()
                    .filter(|&(u, (_, &b))| b != 0 && u != v)
                    .map(|(_, (&c, _))| c)
                    .sum()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = QuboFile {
            format: QUBO_FORMAT.to_string(),
            n_vars: self.n_vars,
            offset: self.offset,
            coefficients: self.q.clone(),
            index_map: self.index_map,
            params: self.params.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QuboFile = serde_json::from_str(text)?;
        if file.format != QUBO_FORMAT {
            return Err(Error::Format(format!("unsupported QUBO container `{}`", file.format)));
        }
        let mut p = Self::from_dense(file.n_vars, file.coefficients, file.offset)?;
        if let Some(map) = file.index_map {
            if map.n_vars() != p.n_vars {
                return Err(Error::Format(format!(
                    "index_map covers {} variables but n_vars is {}",
                    map.n_vars(),
                    p.n_vars
                )));
            }
        }
        p.index_map = file.index_map;
        p.params = file.params;
        Ok(p)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub const QUBO_FORMAT: &str = "graphqubo.qubo.dense.v1";

/// On-disk JSON container: `coefficients` is the full symmetric matrix in
/// row-major order under the energy convention of this module.
#[derive(Debug, Serialize, Deserialize)]
struct QuboFile {
    format: String,
    n_vars: usize,
    offset: f64,
    coefficients: Vec<f64>,
    #[serde(default)]
    index_map: Option<IndexMap>,
    #[serde(default)]
    params: Option<ModelParams>,
}

/// Compiles a clustering model with the default variable cap.
pub fn build_qubo(d: &DistanceMatrix, params: &ModelParams) -> Result<QuboProblem> {
    build_qubo_with_cap(d, params, DEFAULT_MAX_VARS)
}

/// Compiles Model 1 or Model 2 into a QUBO.
///
/// Squared penalties are expanded with `x^2 = x`:
///
/// * `P (sum_k x_ik - 1)^2 = P (1 - sum_k x_ik + 2 sum_{k<k'} x_ik x_ik')`
/// * `lambda (sum_i x_ik - U)^2 = lambda (U^2 + (1 - 2U) sum_i x_ik + 2 sum_{i<j} x_ik x_jk)`
pub fn build_qubo_with_cap(d: &DistanceMatrix, params: &ModelParams, max_vars: usize) -> Result<QuboProblem> {
    params.validate()?;
    let n = d.n();
    let k = params.k_clusters;
    let map = IndexMap {
        n_vertices: n,
        k_clusters: k,
    };
    let n_vars = n
        .checked_mul(k)
        .filter(|&v| v <= max_vars)
        .ok_or(Error::ProblemTooLarge {
            size: (n as u64).saturating_mul(k as u64),
            cap: max_vars as u64,
        })?;

    let mut q = vec![0.0; n_vars * n_vars];
    let mut add_pair = |u: usize, v: usize, coeff: f64| {
        q[u * n_vars + v] += coeff / 2.0;
        q[v * n_vars + u] += coeff / 2.0;
    };

    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            if dij != 0.0 {
                for c in 0..k {
                    add_pair(map.var(i, c), map.var(j, c), dij);
                }
            }
        }
    }

    let p = params.penalty_p;
    for i in 0..n {
        for c in 0..k {
            for c2 in (c + 1)..k {
                add_pair(map.var(i, c), map.var(i, c2), 2.0 * p);
            }
        }
    }
    let mut offset = n as f64 * p;

    let mut diag = vec![-p; n_vars];
    if params.model == Model::Model2 {
        let lambda = params.lambda_reg;
        let u_bar = params.resolved_u_bar(n);
        for c in 0..k {
            for i in 0..n {
                for j in (i + 1)..n {
                    add_pair(map.var(i, c), map.var(j, c), 2.0 * lambda);
                }
            }
        }
        for slot in &mut diag {
            *slot += lambda * (1.0 - 2.0 * u_bar);
        }
        offset += k as f64 * lambda * u_bar * u_bar;
    }
    for (v, c) in diag.into_iter().enumerate() {
        q[v * n_vars + v] += c;
    }

    let problem = QuboProblem {
        n_vars,
        q,
        offset,
        index_map: Some(map),
        params: Some(params.clone()),
    };
    debug_assert!(problem.is_symmetric());
    Ok(problem)
}

/// One-hot expansion of a labeling into a spin state.
pub fn encode_labels(labels: &[usize], k: usize) -> SpinState {
    let mut x = SpinState::zeros(labels.len() * k);
    for (i, &c) in labels.iter().enumerate() {
        x[i * k + c] = 1;
    }
    x
}
