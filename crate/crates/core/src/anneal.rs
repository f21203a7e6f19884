//! Simulated annealing over a [`QuboProblem`], modeled on digital-annealer
//! hardware.
//!
//! In the default parallel-trial mode every sweep scores all single-bit
//! flips against the current state, runs an independent Metropolis test for
//! each, and applies one flip chosen uniformly among those accepted. When a
//! sweep accepts nothing, an escape offset is added to every candidate's
//! energy gain on the next sweep (and keeps growing until something is
//! accepted, at which point it resets to zero). Flips with zero effective
//! energy change are not accepted, so plateaus are only crossed through the
//! escape offset.
//!
//! Local fields `h[v] = sum_{u != v} q[v][u] x_u` are maintained
//! incrementally, so scoring a sweep is `O(n)` and applying a flip is `O(n)`.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{QuboProblem, SpinState};
use crate::rng::{derive_seed, Xoshiro256StarStar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceMode {
    /// Score every flip, accept one uniformly among Metropolis accepters.
    #[default]
    ParallelTrial,
    /// Classic single-site Metropolis, visiting variables in index order.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMode {
    /// One cooling pass per replica (cut short if the time budget expires).
    #[default]
    Schedule,
    /// Restart cooling passes until the time budget expires.
    WallClock,
}

/// Annealing parameters. `None` fields are derived from the problem at run
/// time: `t_initial = max |q|`, `t_final = 1e-3 * t_initial`,
/// `offset_escape = t_initial / 1000`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub t_initial: Option<f64>,
    pub t_final: Option<f64>,
    pub cooling_ratio: f64,
    pub sweeps_per_temperature: usize,
    pub replicas: usize,
    pub seed: u64,
    pub offset_escape: Option<f64>,
    pub mode: AcceptanceMode,
    pub stop: StopMode,
    /// Wall-clock budget in seconds for the whole run.
    pub time_budget: Option<f64>,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_initial: None,
            t_final: None,
            cooling_ratio: 0.98,
            sweeps_per_temperature: 10,
            replicas: 8,
            seed: 0,
            offset_escape: None,
            mode: AcceptanceMode::ParallelTrial,
            stop: StopMode::Schedule,
            time_budget: None,
        }
    }
}

impl AnnealSchedule {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, seconds: f64) -> Self {
        self.time_budget = Some(seconds);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.cooling_ratio > 0.0 && self.cooling_ratio < 1.0) {
            return bad("cooling_ratio must lie in (0, 1)");
        }
        if self.sweeps_per_temperature == 0 {
            return bad("sweeps_per_temperature must be >= 1");
        }
        if self.replicas == 0 {
            return bad("replicas must be >= 1");
        }
        if let Some(t) = self.t_initial {
            if !(t > 0.0 && t.is_finite()) {
                return bad("t_initial must be positive");
            }
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return bad("t_final must be positive");
            }
        }
        if let (Some(ti), Some(tf)) = (self.t_initial, self.t_final) {
            if tf > ti {
                return bad("t_final must not exceed t_initial");
            }
        }
        if let Some(o) = self.offset_escape {
            if !(o >= 0.0 && o.is_finite()) {
                return bad("offset_escape must be non-negative");
            }
        }
        if let Some(b) = self.time_budget {
            if b.is_nan() || b < 0.0 {
                return bad("time_budget must be non-negative");
            }
        }
        Ok(())
    }

    /// Concrete temperatures for a problem.
    pub fn resolve(&self, p: &QuboProblem) -> Result<ResolvedSchedule> {
        self.validate()?;
        let scale = p.max_abs_coeff();
        let t_initial = self.t_initial.unwrap_or(if scale > 0.0 { scale } else { 1.0 });
        let t_final = self.t_final.unwrap_or(1e-3 * t_initial);
        if t_final > t_initial {
            return Err(Error::InvalidParameter(format!(
                "t_final {t_final} exceeds t_initial {t_initial}"
            )));
        }
        Ok(ResolvedSchedule {
            t_initial,
            t_final,
            cooling_ratio: self.cooling_ratio,
            sweeps_per_temperature: self.sweeps_per_temperature,
            replicas: self.replicas,
            seed: self.seed,
            offset_escape: self.offset_escape.unwrap_or(t_initial / 1000.0),
            mode: self.mode,
            stop: self.stop,
            time_budget: self.time_budget,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub cooling_ratio: f64,
    pub sweeps_per_temperature: usize,
    pub replicas: usize,
    pub seed: u64,
    pub offset_escape: f64,
    pub mode: AcceptanceMode,
    pub stop: StopMode,
    pub time_budget: Option<f64>,
}

impl ResolvedSchedule {
    /// Number of temperature levels in one cooling pass.
    pub fn levels(&self) -> usize {
        let mut t = self.t_initial;
        let mut levels = 0;
        loop {
            levels += 1;
            t *= self.cooling_ratio;
            if t < self.t_final * (1.0 - 1e-12) {
                return levels;
            }
        }
    }

    pub fn sweeps_per_pass(&self) -> usize {
        self.levels() * self.sweeps_per_temperature
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: u64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub best_state: SpinState,
    pub best_energy: f64,
    /// Best-so-far energy of the winning replica, recorded on improvement.
    pub energy_trace: Vec<TracePoint>,
    /// Seconds from the start of annealing (excluding problem construction).
    pub wall_time: f64,
    /// Seconds until the winning replica first reached `best_energy`.
    pub time_to_best: f64,
    pub replica_id: usize,
    /// Sweeps run by the winning replica.
    pub sweeps_executed: u64,
    /// Sweeps run across all replicas.
    pub total_sweeps: u64,
    /// True when the time budget cut the run short.
    pub budget_exhausted: bool,
    pub schedule: ResolvedSchedule,
}

impl AnnealResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("sweep,best_energy\n");
        for p in &self.energy_trace {
            out.push_str(&format!("{},{:?}\n", p.sweep, p.best_energy));
        }
        out
    }
}

struct ReplicaOutcome {
    replica_id: usize,
    best_state: SpinState,
    best_energy: f64,
    trace: Vec<TracePoint>,
    time_to_best: f64,
    sweeps: u64,
    budget_exhausted: bool,
    target_hit: Option<f64>,
}

/// Stopping conditions shared by all replicas of one run.
struct RunControl {
    start: Instant,
    deadline: Option<Instant>,
    target: Option<f64>,
    target_reached: AtomicBool,
}

impl RunControl {
    fn new(budget: Option<f64>, target: Option<f64>) -> Self {
        let start = Instant::now();
        let deadline = budget.map(|b| start + Duration::from_secs_f64(b));
        Self {
            start,
            deadline,
            target,
            target_reached: AtomicBool::new(false),
        }
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn should_stop(&self) -> bool {
        self.target_reached.load(Ordering::Relaxed) || self.out_of_time()
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Tolerance for comparing a best-so-far energy with a target.
fn reaches(energy: f64, target: f64) -> bool {
    energy <= target + 1e-9 * target.abs().max(1.0)
}

/// Single chain state with incrementally maintained local fields.
struct Chain<'a> {
    p: &'a QuboProblem,
    x: SpinState,
    fields: Vec<f64>,
    energy: f64,
    escape: f64,
}

impl<'a> Chain<'a> {
    fn random(p: &'a QuboProblem, rng: &mut Xoshiro256StarStar) -> Self {
        let x = SpinState((0..p.n_vars()).map(|_| u8::from(rng.next_bool())).collect());
        let fields = p.local_fields(&x);
        let energy = p.energy_unchecked(&x);
        Self {
            p,
            x,
            fields,
            energy,
            escape: 0.0,
        }
    }

    #[inline]
    fn delta(&self, v: usize) -> f64 {
        let gain = self.p.coeff(v, v) + 2.0 * self.fields[v];
        if self.x[v] != 0 {
            -gain
        } else {
            gain
        }
    }

    fn flip(&mut self, v: usize) {
        let delta = self.delta(v);
        self.x.flip(v);
        let s = if self.x[v] != 0 { 1.0 } else { -1.0 };
        let row = self.p.row(v);
        for (h, &c) in self.fields.iter_mut().zip(row) {
            *h += s * c;
        }
        // The field of v excludes its own diagonal.
        self.fields[v] -= s * row[v];
        self.energy += delta;
    }

    #[inline]
    fn accept(effective: f64, temperature: f64, rng: &mut Xoshiro256StarStar) -> bool {
        if effective < 0.0 {
            true
        } else if effective > 0.0 {
            // exp(-40) is below the resolution of the uniform draw.
            effective < 40.0 * temperature && rng.next_f64() < (-effective / temperature).exp()
        } else {
            false
        }
    }

    /// One parallel-trial sweep; returns the flipped variable, if any.
    fn parallel_trial(
        &mut self,
        temperature: f64,
        escape_step: f64,
        rng: &mut Xoshiro256StarStar,
        accepted: &mut Vec<usize>,
    ) -> bool {
        accepted.clear();
        for v in 0..self.x.len() {
            if Self::accept(self.delta(v) - self.escape, temperature, rng) {
                accepted.push(v);
            }
        }
        if accepted.is_empty() {
            self.escape += escape_step;
            return false;
        }
        let v = accepted[rng.below(accepted.len() as u64) as usize];
        self.flip(v);
        self.escape = 0.0;
        true
    }

    /// One sequential sweep over all variables. Calls `on_flip` after every
    /// accepted flip so the caller can track the best state.
    fn sequential(
        &mut self,
        temperature: f64,
        escape_step: f64,
        rng: &mut Xoshiro256StarStar,
        mut on_flip: impl FnMut(&Self),
    ) -> bool {
        let mut any = false;
        for v in 0..self.x.len() {
            if Self::accept(self.delta(v) - self.escape, temperature, rng) {
                self.flip(v);
                any = true;
                on_flip(self);
            }
        }
        if any {
            self.escape = 0.0;
        } else {
            self.escape += escape_step;
        }
        any
    }
}

fn run_replica(p: &QuboProblem, s: &ResolvedSchedule, replica_id: usize, control: &RunControl) -> ReplicaOutcome {
    let restart_all = s.stop == StopMode::WallClock && s.time_budget.is_some() || control.target.is_some();
    let mut out = ReplicaOutcome {
        replica_id,
        best_state: SpinState::zeros(p.n_vars()),
        best_energy: f64::INFINITY,
        trace: Vec::new(),
        time_to_best: 0.0,
        sweeps: 0,
        budget_exhausted: false,
        target_hit: None,
    };
    let mut accepted = Vec::with_capacity(p.n_vars());

    let record = |out: &mut ReplicaOutcome, chain: &Chain<'_>, sweep: u64| {
        if chain.energy < out.best_energy {
            out.best_energy = chain.energy;
            out.best_state.0.copy_from_slice(&chain.x);
            out.trace.push(TracePoint {
                sweep,
                best_energy: chain.energy,
            });
            out.time_to_best = control.elapsed();
            if let Some(target) = control.target {
                if out.target_hit.is_none() && reaches(chain.energy, target) {
                    out.target_hit = Some(out.time_to_best);
                    control.target_reached.store(true, Ordering::Relaxed);
                }
            }
        }
    };

    'passes: for pass in 0u64.. {
        let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(s.seed, ((pass << 20) | replica_id as u64) + 1));
        let mut chain = Chain::random(p, &mut rng);
        let sweep = out.sweeps;
        record(&mut out, &chain, sweep);

        let mut t = s.t_initial;
        loop {
            for _ in 0..s.sweeps_per_temperature {
                if control.should_stop() {
                    out.budget_exhausted = control.out_of_time();
                    break 'passes;
                }
                out.sweeps += 1;
                let sweep = out.sweeps;
                match s.mode {
                    AcceptanceMode::ParallelTrial => {
                        if chain.parallel_trial(t, s.offset_escape, &mut rng, &mut accepted) {
                            record(&mut out, &chain, sweep);
                        }
                    }
                    AcceptanceMode::Sequential => {
                        chain.sequential(t, s.offset_escape, &mut rng, |c| record(&mut out, c, sweep));
                    }
                }
            }
            t *= s.cooling_ratio;
            if t < s.t_final * (1.0 - 1e-12) {
                break;
            }
        }
        if !restart_all {
            break;
        }
    }

    // Incremental energies drift; report a fresh evaluation.
    out.best_energy = p.energy_unchecked(&out.best_state);
    out
}

/// Returns the reduced result and the earliest target hit of any replica.
fn run(p: &QuboProblem, s: &ResolvedSchedule, control: &RunControl) -> (AnnealResult, Option<f64>) {
    let outcomes: Vec<ReplicaOutcome> = (0..s.replicas)
        .into_par_iter()
        .map(|r| run_replica(p, s, r, control))
        .collect();
    let wall_time = control.elapsed();
    let total_sweeps = outcomes.iter().map(|o| o.sweeps).sum();
    let budget_exhausted = outcomes.iter().any(|o| o.budget_exhausted);
    let first_hit = outcomes.iter().filter_map(|o| o.target_hit).min_by(f64::total_cmp);
    let best = outcomes
        .into_iter()
        .min_by(|a, b| {
            a.best_energy
                .total_cmp(&b.best_energy)
                .then(a.replica_id.cmp(&b.replica_id))
        })
        .expect("at least one replica");
    let result = AnnealResult {
        best_state: best.best_state,
        best_energy: best.best_energy,
        energy_trace: best.trace,
        wall_time,
        time_to_best: best.time_to_best,
        replica_id: best.replica_id,
        sweeps_executed: best.sweeps,
        total_sweeps,
        budget_exhausted,
        schedule: s.clone(),
    };
    (result, first_hit)
}

/// Runs all replicas and returns the lowest-energy result (ties go to the
/// lowest replica id). Deterministic for a given seed unless the time
/// budget cuts a run short.
pub fn anneal(p: &QuboProblem, schedule: &AnnealSchedule) -> Result<AnnealResult> {
    let s = schedule.resolve(p)?;
    let control = RunControl::new(s.time_budget, None);
    Ok(run(p, &s, &control).0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetHit {
    /// Seconds until some replica's best-so-far energy first reached the target.
    pub seconds: f64,
    pub result: AnnealResult,
}

/// Anneals (restarting passes) until some replica reaches `target` or
/// `budget_s` seconds elapse. Returns [`Error::Timeout`] if the target is
/// never reached. A target of `+inf` is satisfied immediately.
pub fn time_to_target(p: &QuboProblem, schedule: &AnnealSchedule, target: f64, budget_s: f64) -> Result<TargetHit> {
    if target.is_nan() {
        return Err(Error::InvalidParameter("target is NaN".into()));
    }
    let mut s = schedule.resolve(p)?;
    if target == f64::INFINITY {
        let mut zero = s.clone();
        zero.time_budget = Some(0.0);
        let control = RunControl::new(Some(0.0), None);
        return Ok(TargetHit {
            seconds: 0.0,
            result: run(p, &zero, &control).0,
        });
    }
    s.time_budget = Some(budget_s);
    let control = RunControl::new(Some(budget_s), Some(target));
    match run(p, &s, &control) {
        (result, Some(seconds)) => Ok(TargetHit { seconds, result }),
        (_, None) => Err(Error::Timeout { target, budget_s }),
    }
}
