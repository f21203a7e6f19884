//! Graph clustering as intra-cluster distance minimization, compiled to a
//! QUBO and solved by a parallel-trial simulated annealer.
//!
//! Pipeline: [`graph::Graph`] → [`distances::distance_matrix`] →
//! [`qubo::build_qubo`] → [`anneal::anneal`] → [`clustering::decode`].
//! [`exact`] provides brute-force oracles for small instances and [`bench`]
//! runs the whole pipeline over stochastic-block-model graphs.

pub mod anneal;
pub mod bench;
pub mod clustering;
pub mod distances;
pub mod error;
pub mod exact;
pub mod graph;
pub mod qubo;
pub mod rng;

pub use anneal::{anneal, time_to_target, AcceptanceMode, AnnealResult, AnnealSchedule, StopMode};
pub use clustering::{adjusted_rand_index, decode, degeneracy_report, objective_value, Assignment, DecodePolicy};
pub use distances::{burt_distance, distance_matrix, DistanceMatrix};
pub use error::{Error, Result};
pub use exact::{solve_exact, solve_exact_labels, ExactResult};
pub use graph::{generate_sbm, Graph, SbmSpec};
pub use qubo::{build_qubo, Model, ModelParams, QuboProblem, SpinState};
