//! Exhaustive minimization for desk-scale instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::qubo::{encode_labels, Model, ModelParams, QuboProblem, SpinState};

pub const DEFAULT_EXACT_CAP: usize = 24;

/// Argmin lists longer than this are truncated.
pub const MAX_OPTIMAL_STATES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub optimal_energy: f64,
    /// All global minimizers in lexicographic order.
    pub optimal_states: Vec<SpinState>,
    pub states_enumerated: u64,
    /// True when more than [`MAX_OPTIMAL_STATES`] minimizers exist.
    pub truncated: bool,
}

/// Energies within this distance of the minimum count as ties.
fn tie_tolerance(e: f64) -> f64 {
    1e-9 * e.abs().max(1.0)
}

#[derive(Default)]
struct Argmins {
    best: f64,
    states: Vec<u64>,
    truncated: bool,
}

impl Argmins {
    fn new() -> Self {
        Self {
            best: f64::INFINITY,
            states: Vec::new(),
            truncated: false,
        }
    }

    #[inline]
    fn offer(&mut self, energy: f64, state: u64) {
        if energy < self.best - tie_tolerance(self.best) {
            self.best = energy;
            self.states.clear();
            self.states.push(state);
            self.truncated = false;
        } else if energy <= self.best + tie_tolerance(self.best) {
            self.best = self.best.min(energy);
            if self.states.len() < MAX_OPTIMAL_STATES {
                self.states.push(state);
            } else {
                self.truncated = true;
            }
        }
    }

    fn merge(mut self, other: Argmins) -> Argmins {
        if other.best < self.best {
            return other.merge(self);
        }
        for s in other.states {
            self.offer(other.best, s);
        }
        self.truncated |= other.truncated;
        self
    }
}

/// Enumerates all `2^n` states of `p` with Gray-code single-flip updates.
///
/// The high `min(n, 6)` bits are fixed per work item; each item walks its
/// low bits in reflected Gray-code order. Candidate minimizers are
/// re-evaluated from scratch before being reported.
pub fn solve_exact(p: &QuboProblem, cap: usize) -> Result<ExactResult> {
    let n = p.n_vars();
    if n > cap || n >= 64 {
        return Err(Error::ProblemTooLarge {
            size: n as u64,
            cap: cap.min(63) as u64,
        });
    }
    let high_bits = n.min(6);
    let low_bits = n - high_bits;

    let argmins = (0..1u64 << high_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut x = SpinState::from_index(prefix << low_bits, n);
            let mut fields = p.local_fields(&x);
            let mut energy = p.energy_unchecked(&x);
            let mut index = prefix << low_bits;
            let mut best = Argmins::new();
            best.offer(energy, index);
            for step in 1u64..(1u64 << low_bits) {
                let v = step.trailing_zeros() as usize;
                let gain = p.coeff(v, v) + 2.0 * fields[v];
                let s = if x[v] != 0 { -1.0 } else { 1.0 };
                energy += s * gain;
                x.flip(v);
                index ^= 1 << v;
                let row = p.row(v);
                for (h, &c) in fields.iter_mut().zip(row) {
                    *h += s * c;
                }
                fields[v] -= s * row[v];
                best.offer(energy, index);
            }
            best
        })
        .reduce(Argmins::new, Argmins::merge);

    finalize(argmins, 1u64 << n, |index| {
        let x = SpinState::from_index(index, n);
        let e = p.energy_unchecked(&x);
        (x, e)
    })
}

fn finalize(
    argmins: Argmins,
    states_enumerated: u64,
    evaluate: impl Fn(u64) -> (SpinState, f64),
) -> Result<ExactResult> {
    let mut evaluated: Vec<(SpinState, f64)> = argmins.states.iter().map(|&s| evaluate(s)).collect();
    let optimal_energy = evaluated
        .iter()
        .map(|(_, e)| *e)
        .min_by(f64::total_cmp)
        .unwrap_or(f64::INFINITY);
    let tol = tie_tolerance(optimal_energy);
    evaluated.retain(|(_, e)| *e <= optimal_energy + tol);
    let mut optimal_states: Vec<SpinState> = evaluated.into_iter().map(|(x, _)| x).collect();
    optimal_states.sort();
    optimal_states.dedup();
    Ok(ExactResult {
        optimal_energy,
        optimal_states,
        states_enumerated,
        truncated: argmins.truncated,
    })
}

/// Direct clustering objective of a labeling: intra-cluster distance plus,
/// for Model 2, `lambda * sum_k (size_k - U)^2`.
pub fn labeling_objective(d: &DistanceMatrix, params: &ModelParams, labels: &[usize]) -> f64 {
    let n = d.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                total += d.get(i, j);
            }
        }
    }
    if params.model == Model::Model2 {
        let u_bar = params.resolved_u_bar(n);
        let mut sizes = vec![0usize; params.k_clusters];
        for &c in labels {
            sizes[c] += 1;
        }
        total += params.lambda_reg * sizes.iter().map(|&s| (s as f64 - u_bar).powi(2)).sum::<f64>();
    }
    total
}

/// Minimizes the direct objective over the `K^N` valid labelings only.
/// States in the result are one-hot encodings of the optimal labelings.
pub fn solve_exact_labels(d: &DistanceMatrix, params: &ModelParams, cap: usize) -> Result<ExactResult> {
    params.validate()?;
    let n = d.n();
    let k = params.k_clusters;
    let bits_needed = (n as f64) * (k as f64).log2();
    if bits_needed > cap as f64 + 1e-9 {
        return Err(Error::ProblemTooLarge {
            size: bits_needed.ceil() as u64,
            cap: cap as u64,
        });
    }
    let total = (k as u64).pow(n as u32);

    let labels_of = |mut index: u64| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let c = (index % k as u64) as usize;
                index /= k as u64;
                c
            })
            .collect()
    };

    // Split on the label of the last vertex, walk the rest as an odometer.
    let outer = if n == 0 { 1 } else { k as u64 };
    let inner = total / outer;
    let argmins = (0..outer)
        .into_par_iter()
        .map(|top| {
            let mut best = Argmins::new();
            let mut labels = labels_of(top * inner);
            for index in (top * inner)..((top + 1) * inner) {
                if index > top * inner {
                    // Odometer increment on the low vertices.
                    for slot in labels.iter_mut() {
                        *slot += 1;
                        if *slot < k {
                            break;
                        }
                        *slot = 0;
                    }
                }
                best.offer(labeling_objective(d, params, &labels), index);
            }
            best
        })
        .reduce(Argmins::new, Argmins::merge);

    finalize(argmins, total, |index| {
        let labels = labels_of(index);
        let e = labeling_objective(d, params, &labels);
        (encode_labels(&labels, k), e)
    })
}
