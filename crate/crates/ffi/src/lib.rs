//! C ABI for graphqubo.
//!
//! Objects cross the boundary as opaque handles created by `gq_*_new` /
//! `gq_*_build` style functions and released with the matching `gq_*_free`.
//! Fallible functions return a [`GqStatus`] and write results through out
//! pointers; on failure, [`gq_last_error_message`] describes the error for
//! the calling thread. Spin states are arrays of `uint8_t` holding 0 or 1.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use graphqubo::anneal::{AcceptanceMode, AnnealResult, AnnealSchedule, StopMode};
use graphqubo::clustering::{Assignment, DecodePolicy};
use graphqubo::distances::DistanceMatrix;
use graphqubo::exact::ExactResult;
use graphqubo::graph::{Graph, SbmSpec};
use graphqubo::qubo::{Model, ModelParams, QuboProblem};
use graphqubo::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqStatus {
    Ok = 0,
    /// Null pointer or otherwise unusable argument.
    InvalidArgument = 1,
    InvalidEdge = 2,
    DuplicateEdge = 3,
    IndexOutOfRange = 4,
    Parse = 5,
    Format = 6,
    InvalidParameter = 7,
    InvalidPair = 8,
    Dimension = 9,
    ProblemTooLarge = 10,
    ConstraintViolation = 11,
    Timeout = 12,
    Io = 13,
    Json = 14,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

impl From<&Error> for GqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidEdge { .. } => GqStatus::InvalidEdge,
            Error::DuplicateEdge { .. } => GqStatus::DuplicateEdge,
            Error::IndexOutOfRange { .. } => GqStatus::IndexOutOfRange,
            Error::Parse { .. } => GqStatus::Parse,
            Error::Format(_) => GqStatus::Format,
            Error::InvalidParameter(_) => GqStatus::InvalidParameter,
            Error::InvalidPair { .. } => GqStatus::InvalidPair,
            Error::Dimension { .. } => GqStatus::Dimension,
            Error::ProblemTooLarge { .. } => GqStatus::ProblemTooLarge,
            Error::ConstraintViolation { .. } => GqStatus::ConstraintViolation,
            Error::Timeout { .. } => GqStatus::Timeout,
            Error::Io { .. } => GqStatus::Io,
            Error::Json(_) => GqStatus::Json,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Internal failure: status plus message.
struct Failure(GqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(GqStatus::from(&e), e.to_string())
    }
}

fn invalid(message: &str) -> Failure {
    Failure(GqStatus::InvalidArgument, message.to_string())
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GqStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside graphqubo".into());
            GqStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(invalid("path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| invalid("path is not valid UTF-8"))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- graphs

/// Opaque graph handle.
pub struct GqGraph(Graph);

/// Builds a graph from parallel edge arrays. `weights` may be NULL for an
/// unweighted graph.
#[no_mangle]
pub unsafe extern "C" fn gq_graph_new(
    n_vertices: usize,
    src: *const usize,
    dst: *const usize,
    weights: *const f64,
    n_edges: usize,
    out: *mut *mut GqGraph,
) -> GqStatus {
    guard(|| {
        let src = as_slice(src, n_edges, "src")?;
        let dst = as_slice(dst, n_edges, "dst")?;
        let weights = if weights.is_null() {
            None
        } else {
            Some(as_slice(weights, n_edges, "weights")?)
        };
        let edges: Vec<(usize, usize, f64)> = (0..n_edges)
            .map(|e| (src[e], dst[e], weights.map_or(1.0, |w| w[e])))
            .collect();
        let g = Graph::new(n_vertices, &edges)?;
        write_out(out, boxed(GqGraph(g)), "out")
    })
}

/// Samples a stochastic block model graph. When `labels_out` is non-NULL it
/// receives the planted block of every vertex (length = sum of block sizes).
#[no_mangle]
pub unsafe extern "C" fn gq_graph_generate_sbm(
    block_sizes: *const usize,
    n_blocks: usize,
    intra_lo: f64,
    intra_hi: f64,
    inter_lo: f64,
    inter_hi: f64,
    seed: u64,
    out: *mut *mut GqGraph,
    labels_out: *mut usize,
) -> GqStatus {
    guard(|| {
        let spec = SbmSpec {
            block_sizes: as_slice(block_sizes, n_blocks, "block_sizes")?.to_vec(),
            intra_prob_range: (intra_lo, intra_hi),
            inter_prob_range: (inter_lo, inter_hi),
            seed,
        };
        let planted = graphqubo::generate_sbm(&spec)?;
        if !labels_out.is_null() {
            slice::from_raw_parts_mut(labels_out, planted.labels.len()).copy_from_slice(&planted.labels);
        }
        write_out(out, boxed(GqGraph(planted.graph)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_graph_load(path: *const c_char, out: *mut *mut GqGraph) -> GqStatus {
    guard(|| {
        let g = Graph::load_edge_list(path_arg(path)?)?;
        write_out(out, boxed(GqGraph(g)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_graph_save(graph: *const GqGraph, path: *const c_char) -> GqStatus {
    guard(|| {
        as_ref(graph, "graph")?.0.save_edge_list(path_arg(path)?)?;
        Ok(())
    })
}

/// Vertex count, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn gq_graph_n_vertices(graph: *const GqGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n_vertices())
}

#[no_mangle]
pub unsafe extern "C" fn gq_graph_n_edges(graph: *const GqGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n_edges())
}

#[no_mangle]
pub unsafe extern "C" fn gq_graph_free(graph: *mut GqGraph) {
    free(graph)
}

// ------------------------------------------------------------- distances

/// Opaque distance-matrix handle.
pub struct GqDistances(DistanceMatrix);

#[no_mangle]
pub unsafe extern "C" fn gq_burt_distance(graph: *const GqGraph, i: usize, j: usize, out: *mut f64) -> GqStatus {
    guard(|| {
        let d = graphqubo::burt_distance(&as_ref(graph, "graph")?.0, i, j)?;
        write_out(out, d, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_distances_new(graph: *const GqGraph, out: *mut *mut GqDistances) -> GqStatus {
    guard(|| {
        let d = graphqubo::distance_matrix(&as_ref(graph, "graph")?.0);
        write_out(out, boxed(GqDistances(d)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_distances_get(d: *const GqDistances, i: usize, j: usize, out: *mut f64) -> GqStatus {
    guard(|| {
        let d = &as_ref(d, "distances")?.0;
        for index in [i, j] {
            if index >= d.n() {
                return Err(Error::IndexOutOfRange { index, n: d.n() }.into());
            }
        }
        write_out(out, d.get(i, j), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_distances_n(d: *const GqDistances) -> usize {
    d.as_ref().map_or(0, |d| d.0.n())
}

#[no_mangle]
pub unsafe extern "C" fn gq_distances_free(d: *mut GqDistances) {
    free(d)
}

// ------------------------------------------------------------------ QUBO

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqModel {
    Model1 = 1,
    Model2 = 2,
}

/// Model parameters. `u_bar <= 0` selects the default `N / K`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GqModelParams {
    pub model: GqModel,
    pub k_clusters: usize,
    pub penalty_p: f64,
    pub lambda_reg: f64,
    pub u_bar: f64,
}

impl From<GqModelParams> for ModelParams {
    fn from(p: GqModelParams) -> Self {
        ModelParams {
            model: match p.model {
                GqModel::Model1 => Model::Model1,
                GqModel::Model2 => Model::Model2,
            },
            k_clusters: p.k_clusters,
            penalty_p: p.penalty_p,
            lambda_reg: p.lambda_reg,
            u_bar: (p.u_bar > 0.0).then_some(p.u_bar),
        }
    }
}

/// Defaults: P = 16, lambda = 0.75, U = N / K.
#[no_mangle]
pub extern "C" fn gq_model_params_default(model: GqModel, k_clusters: usize) -> GqModelParams {
    GqModelParams {
        model,
        k_clusters,
        penalty_p: graphqubo::qubo::DEFAULT_PENALTY,
        lambda_reg: graphqubo::qubo::DEFAULT_LAMBDA,
        u_bar: 0.0,
    }
}

/// Opaque QUBO handle.
pub struct GqQubo(QuboProblem);

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_build(
    d: *const GqDistances,
    params: *const GqModelParams,
    out: *mut *mut GqQubo,
) -> GqStatus {
    guard(|| {
        let d = &as_ref(d, "distances")?.0;
        let params: ModelParams = (*as_ref(params, "params")?).into();
        let p = graphqubo::build_qubo(d, &params)?;
        write_out(out, boxed(GqQubo(p)), "out")
    })
}

/// Wraps a dense symmetric row-major matrix of `n_vars * n_vars` entries.
#[no_mangle]
pub unsafe extern "C" fn gq_qubo_from_dense(
    n_vars: usize,
    coefficients: *const f64,
    offset: f64,
    out: *mut *mut GqQubo,
) -> GqStatus {
    guard(|| {
        let len = n_vars.checked_mul(n_vars).ok_or_else(|| invalid("n_vars overflows"))?;
        let q = as_slice(coefficients, len, "coefficients")?.to_vec();
        let p = QuboProblem::from_dense(n_vars, q, offset)?;
        write_out(out, boxed(GqQubo(p)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_load_json(path: *const c_char, out: *mut *mut GqQubo) -> GqStatus {
    guard(|| {
        let p = QuboProblem::load_json(path_arg(path)?)?;
        write_out(out, boxed(GqQubo(p)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_save_json(qubo: *const GqQubo, path: *const c_char) -> GqStatus {
    guard(|| {
        as_ref(qubo, "qubo")?.0.save_json(path_arg(path)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_n_vars(qubo: *const GqQubo) -> usize {
    qubo.as_ref().map_or(0, |q| q.0.n_vars())
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_offset(qubo: *const GqQubo) -> f64 {
    qubo.as_ref().map_or(f64::NAN, |q| q.0.offset())
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_energy(qubo: *const GqQubo, state: *const u8, len: usize, out: *mut f64) -> GqStatus {
    guard(|| {
        let q = &as_ref(qubo, "qubo")?.0;
        let e = q.energy(as_slice(state, len, "state")?)?;
        write_out(out, e, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_delta_energy(
    qubo: *const GqQubo,
    state: *const u8,
    len: usize,
    var: usize,
    out: *mut f64,
) -> GqStatus {
    guard(|| {
        let q = &as_ref(qubo, "qubo")?.0;
        let e = q.delta_energy(as_slice(state, len, "state")?, var)?;
        write_out(out, e, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_qubo_free(qubo: *mut GqQubo) {
    free(qubo)
}

// ------------------------------------------------------------- annealing

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqAcceptance {
    ParallelTrial = 0,
    Sequential = 1,
}

/// Annealing schedule. Non-positive `t_initial`, `t_final` and negative
/// `offset_escape` select the problem-derived defaults; a negative
/// `time_budget` means no budget.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GqAnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub cooling_ratio: f64,
    pub sweeps_per_temperature: usize,
    pub replicas: usize,
    pub seed: u64,
    pub offset_escape: f64,
    pub acceptance: GqAcceptance,
    /// Restart cooling passes until the budget expires.
    pub restart_until_budget: bool,
    pub time_budget: f64,
}

impl From<GqAnnealSchedule> for AnnealSchedule {
    fn from(s: GqAnnealSchedule) -> Self {
        AnnealSchedule {
            t_initial: (s.t_initial > 0.0).then_some(s.t_initial),
            t_final: (s.t_final > 0.0).then_some(s.t_final),
            cooling_ratio: s.cooling_ratio,
            sweeps_per_temperature: s.sweeps_per_temperature,
            replicas: s.replicas,
            seed: s.seed,
            offset_escape: (s.offset_escape >= 0.0).then_some(s.offset_escape),
            mode: match s.acceptance {
                GqAcceptance::ParallelTrial => AcceptanceMode::ParallelTrial,
                GqAcceptance::Sequential => AcceptanceMode::Sequential,
            },
            stop: if s.restart_until_budget {
                StopMode::WallClock
            } else {
                StopMode::Schedule
            },
            time_budget: (s.time_budget >= 0.0).then_some(s.time_budget),
        }
    }
}

#[no_mangle]
pub extern "C" fn gq_anneal_schedule_default() -> GqAnnealSchedule {
    let d = AnnealSchedule::default();
    GqAnnealSchedule {
        t_initial: 0.0,
        t_final: 0.0,
        cooling_ratio: d.cooling_ratio,
        sweeps_per_temperature: d.sweeps_per_temperature,
        replicas: d.replicas,
        seed: d.seed,
        offset_escape: -1.0,
        acceptance: GqAcceptance::ParallelTrial,
        restart_until_budget: false,
        time_budget: -1.0,
    }
}

/// Opaque annealing result handle.
pub struct GqAnnealResult(AnnealResult);

#[no_mangle]
pub unsafe extern "C" fn gq_anneal(
    qubo: *const GqQubo,
    schedule: *const GqAnnealSchedule,
    out: *mut *mut GqAnnealResult,
) -> GqStatus {
    guard(|| {
        let q = &as_ref(qubo, "qubo")?.0;
        let s: AnnealSchedule = (*as_ref(schedule, "schedule")?).into();
        let r = graphqubo::anneal(q, &s)?;
        write_out(out, boxed(GqAnnealResult(r)), "out")
    })
}

/// Seconds until the target energy was first reached; `GQ_STATUS_TIMEOUT`
/// when `budget_s` runs out first.
#[no_mangle]
pub unsafe extern "C" fn gq_time_to_target(
    qubo: *const GqQubo,
    schedule: *const GqAnnealSchedule,
    target: f64,
    budget_s: f64,
    seconds_out: *mut f64,
) -> GqStatus {
    guard(|| {
        let q = &as_ref(qubo, "qubo")?.0;
        let s: AnnealSchedule = (*as_ref(schedule, "schedule")?).into();
        let hit = graphqubo::time_to_target(q, &s, target, budget_s)?;
        write_out(seconds_out, hit.seconds, "seconds_out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_anneal_result_best_energy(r: *const GqAnnealResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.best_energy)
}

#[no_mangle]
pub unsafe extern "C" fn gq_anneal_result_wall_time(r: *const GqAnnealResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.wall_time)
}

#[no_mangle]
pub unsafe extern "C" fn gq_anneal_result_sweeps(r: *const GqAnnealResult) -> u64 {
    r.as_ref().map_or(0, |r| r.0.sweeps_executed)
}

/// Copies the best state into `buf`, which must hold exactly the number of
/// QUBO variables.
#[no_mangle]
pub unsafe extern "C" fn gq_anneal_result_copy_state(r: *const GqAnnealResult, buf: *mut u8, len: usize) -> GqStatus {
    guard(|| {
        let state = &as_ref(r, "result")?.0.best_state;
        if len != state.len() {
            return Err(Error::Dimension {
                expected: state.len(),
                actual: len,
            }
            .into());
        }
        as_mut_slice(buf, len, "buf")?.copy_from_slice(state);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_anneal_result_free(r: *mut GqAnnealResult) {
    free(r)
}

// ----------------------------------------------------------------- exact

/// Opaque exact-solver result handle.
pub struct GqExactResult(ExactResult);

#[no_mangle]
pub unsafe extern "C" fn gq_exact_solve(qubo: *const GqQubo, cap: usize, out: *mut *mut GqExactResult) -> GqStatus {
    guard(|| {
        let r = graphqubo::solve_exact(&as_ref(qubo, "qubo")?.0, cap)?;
        write_out(out, boxed(GqExactResult(r)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_exact_solve_labels(
    d: *const GqDistances,
    params: *const GqModelParams,
    cap: usize,
    out: *mut *mut GqExactResult,
) -> GqStatus {
    guard(|| {
        let params: ModelParams = (*as_ref(params, "params")?).into();
        let r = graphqubo::solve_exact_labels(&as_ref(d, "distances")?.0, &params, cap)?;
        write_out(out, boxed(GqExactResult(r)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_exact_result_optimal_energy(r: *const GqExactResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.optimal_energy)
}

#[no_mangle]
pub unsafe extern "C" fn gq_exact_result_n_states(r: *const GqExactResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.optimal_states.len())
}

#[no_mangle]
pub unsafe extern "C" fn gq_exact_result_copy_state(
    r: *const GqExactResult,
    index: usize,
    buf: *mut u8,
    len: usize,
) -> GqStatus {
    guard(|| {
        let states = &as_ref(r, "result")?.0.optimal_states;
        let state = states
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, n: states.len() })?;
        if len != state.len() {
            return Err(Error::Dimension {
                expected: state.len(),
                actual: len,
            }
            .into());
        }
        as_mut_slice(buf, len, "buf")?.copy_from_slice(state);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_exact_result_free(r: *mut GqExactResult) {
    free(r)
}

// ------------------------------------------------------------ clustering

/// Decodes a spin state of `n * k` bits into `labels_out` (length `n`).
/// With `repair` NULL the decode is strict and fails with
/// `GQ_STATUS_CONSTRAINT_VIOLATION` on any non-one-hot vertex.
#[no_mangle]
pub unsafe extern "C" fn gq_decode(
    state: *const u8,
    len: usize,
    n: usize,
    k: usize,
    repair: *const GqDistances,
    labels_out: *mut usize,
) -> GqStatus {
    guard(|| {
        let x = as_slice(state, len, "state")?;
        let policy = match repair.as_ref() {
            Some(d) => DecodePolicy::Repair(&d.0),
            None => DecodePolicy::Strict,
        };
        let a = graphqubo::decode(x, n, k, policy)?;
        as_mut_slice(labels_out, n, "labels_out")?.copy_from_slice(a.labels());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_objective_value(
    d: *const GqDistances,
    labels: *const usize,
    n: usize,
    k: usize,
    out: *mut f64,
) -> GqStatus {
    guard(|| {
        let a = Assignment::new(as_slice(labels, n, "labels")?.to_vec(), k)?;
        let v = graphqubo::objective_value(&as_ref(d, "distances")?.0, &a)?;
        write_out(out, v, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_adjusted_rand_index(a: *const usize, b: *const usize, n: usize, out: *mut f64) -> GqStatus {
    guard(|| {
        let v = graphqubo::adjusted_rand_index(as_slice(a, n, "a")?, as_slice(b, n, "b")?)?;
        write_out(out, v, "out")
    })
}
