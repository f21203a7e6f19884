//! End-to-end benchmark harness: SBM graphs, both models, annealer and
//! (when small enough) exact solver, emitted as CSV, JSON or Markdown.
//!
//! CSV columns, in order:
//! `name,model,solver,time_s,best_objective,feasible,ari,mega_flag,micro_count,seed`.
//! `best_objective` is the intra-cluster distance sum of the decoded
//! labeling. Rows that failed carry empty value columns; the error text is
//! kept in the JSON report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anneal::{anneal, time_to_target, AnnealSchedule};
use crate::clustering::{
    adjusted_rand_index, decode, degeneracy_report, objective_value, one_hot_violations, DecodePolicy,
    DegeneracyThresholds,
};
use crate::distances::distance_matrix;
use crate::error::{Error, Result};
use crate::exact::{solve_exact, DEFAULT_EXACT_CAP};
use crate::graph::{generate_sbm, near_equal_blocks, SbmSpec};
use crate::qubo::{build_qubo, Model, ModelParams, DEFAULT_LAMBDA, DEFAULT_PENALTY};
use crate::rng::derive_seed;

pub const CSV_HEADER: &str = "name,model,solver,time_s,best_objective,feasible,ari,mega_flag,micro_count,seed";

pub const DEFAULT_TIME_BUDGET: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedGraph {
    pub name: String,
    pub sbm: SbmSpec,
    /// Number of clusters to search for; defaults to the number of planted blocks.
    #[serde(default)]
    pub k_clusters: Option<usize>,
}

impl NamedGraph {
    pub fn k(&self) -> usize {
        self.k_clusters.unwrap_or(self.sbm.n_blocks())
    }
}

/// Model settings without `K`, which comes from each graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    #[serde(default = "default_penalty")]
    pub penalty_p: f64,
    #[serde(default = "default_lambda")]
    pub lambda_reg: f64,
    #[serde(default)]
    pub u_bar: Option<f64>,
}

fn default_penalty() -> f64 {
    DEFAULT_PENALTY
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

impl ModelSpec {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            penalty_p: DEFAULT_PENALTY,
            lambda_reg: DEFAULT_LAMBDA,
            u_bar: None,
        }
    }

    pub fn params(&self, k: usize) -> ModelParams {
        ModelParams {
            model: self.model,
            k_clusters: k,
            penalty_p: self.penalty_p,
            lambda_reg: self.lambda_reg,
            u_bar: self.u_bar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "md" | "markdown" => Ok(Self::Markdown),
            _ => Err(Error::InvalidParameter(format!("unknown report format `{s}`"))),
        }
    }
}

/// What goes into the `time_s` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timing {
    /// Measured solver wall time.
    #[default]
    Wall,
    /// Leave `time_s` empty so reports are byte-reproducible.
    Omit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Strict,
    #[default]
    Repair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Expands to preset graphs (`paper` or `paper-small`) ahead of `graphs`.
    pub preset: Option<String>,
    /// Base seed for preset graphs.
    pub seed: u64,
    pub graphs: Vec<NamedGraph>,
    pub models: Vec<ModelSpec>,
    pub schedule: AnnealSchedule,
    /// Annealer wall-clock budget per row, seconds.
    pub time_budget: f64,
    pub exact_cap: usize,
    /// Budget for the annealer time-to-target run against the exact optimum.
    pub target_budget: f64,
    pub decode: DecodeMode,
    pub timing: Timing,
    pub thresholds: DegeneracyThresholds,
    pub output_dir: Option<PathBuf>,
    pub report_format: Vec<ReportFormat>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            preset: None,
            seed: 0,
            graphs: Vec::new(),
            models: vec![ModelSpec::new(Model::Model1), ModelSpec::new(Model::Model2)],
            schedule: AnnealSchedule::default(),
            time_budget: DEFAULT_TIME_BUDGET,
            exact_cap: DEFAULT_EXACT_CAP,
            target_budget: 10.0,
            decode: DecodeMode::Repair,
            timing: Timing::Wall,
            thresholds: DegeneracyThresholds::default(),
            output_dir: None,
            report_format: vec![ReportFormat::Csv],
        }
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Preset graphs followed by explicitly listed ones.
    pub fn resolved_graphs(&self) -> Result<Vec<NamedGraph>> {
        let mut graphs = match &self.preset {
            Some(name) => preset(name, self.seed)?,
            None => Vec::new(),
        };
        graphs.extend(self.graphs.iter().cloned());
        Ok(graphs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_budget.is_nan() || self.time_budget <= 0.0 {
            return Err(Error::InvalidParameter("time_budget must be > 0".into()));
        }
        let graphs = self.resolved_graphs()?;
        for (i, g) in graphs.iter().enumerate() {
            if graphs[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::InvalidParameter(format!("duplicate graph name `{}`", g.name)));
            }
        }
        self.schedule.validate()
    }
}

/// One row of a Table 1 style graph family.
struct Family {
    name: &'static str,
    k: usize,
    intra: (f64, f64),
    inter: (f64, f64),
}

const FAMILIES: [Family; 5] = [
    Family {
        name: "L4",
        k: 4,
        intra: (0.9, 1.0),
        inter: (0.0, 0.2),
    },
    Family {
        name: "L8",
        k: 8,
        intra: (0.9, 1.0),
        inter: (0.0, 0.2),
    },
    Family {
        name: "H4",
        k: 4,
        intra: (0.7, 1.0),
        inter: (0.0, 0.4),
    },
    Family {
        name: "H8",
        k: 8,
        intra: (0.7, 1.0),
        inter: (0.0, 0.4),
    },
    Family {
        name: "VH8",
        k: 8,
        intra: (0.7, 1.0),
        inter: (0.0, 0.55),
    },
];

/// Vertex counts of the full-size families.
const PAPER_SIZES: [usize; 5] = [247, 120, 253, 127, 122];
/// Scaled-down vertex counts for quick runs.
const SMALL_SIZES: [usize; 5] = [48, 48, 52, 56, 60];

fn family_graph(index: usize, n: usize, name: String, seed: u64) -> NamedGraph {
    let f = &FAMILIES[index];
    NamedGraph {
        name,
        sbm: SbmSpec {
            block_sizes: near_equal_blocks(n, f.k),
            intra_prob_range: f.intra,
            inter_prob_range: f.inter,
            seed,
        },
        k_clusters: Some(f.k),
    }
}

/// Names accepted by [`preset`] and [`preset_graph`].
pub const PRESET_NAMES: [&str; 2] = ["paper", "paper-small"];
pub const GRAPH_PRESET_NAMES: [&str; 5] = ["L4", "L8", "H4", "H8", "VH8"];

/// Expands a preset into named graphs. Graph `i` uses seed `derive_seed(seed, i)`.
pub fn preset(name: &str, seed: u64) -> Result<Vec<NamedGraph>> {
    let (sizes, suffix) = match name {
        "paper" => (PAPER_SIZES, ""),
        "paper-small" => (SMALL_SIZES, "s"),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset `{name}` (expected one of {PRESET_NAMES:?})"
            )))
        }
    };
    Ok(FAMILIES
        .iter()
        .enumerate()
        .map(|(i, f)| family_graph(i, sizes[i], format!("{}{suffix}", f.name), derive_seed(seed, i as u64)))
        .collect())
}

/// A single full-size family (`L4`, `L8`, `H4`, `H8`, `VH8`) with the given seed.
pub fn preset_graph(name: &str, seed: u64) -> Result<NamedGraph> {
    FAMILIES
        .iter()
        .position(|f| f.name.eq_ignore_ascii_case(name))
        .map(|i| family_graph(i, PAPER_SIZES[i], FAMILIES[i].name.to_string(), seed))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown graph preset `{name}` (expected one of {GRAPH_PRESET_NAMES:?})"
            ))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Anneal,
    Exact,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Anneal => "anneal",
            Solver::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub model: Model,
    pub solver: Solver,
    pub time_s: Option<f64>,
    pub best_objective: Option<f64>,
    pub feasible: bool,
    pub ari: Option<f64>,
    pub mega_flag: bool,
    pub micro_count: usize,
    /// Annealer seed for anneal rows, graph seed for exact rows.
    pub seed: u64,
    pub graph_seed: u64,
    pub n_vertices: usize,
    pub k_clusters: usize,
    pub n_vars: usize,
    /// QUBO energy of the solver's best state (penalties included).
    pub energy: Option<f64>,
    pub unassigned: usize,
    pub multi_assigned: usize,
    pub cluster_sizes: Vec<usize>,
    pub labels: Vec<usize>,
    /// Annealer time to reach the exact optimum, when one was computed.
    pub time_to_target_s: Option<f64>,
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(name: &str, model: Model, solver: Solver, seed: u64, graph_seed: u64, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            model,
            solver,
            time_s: None,
            best_objective: None,
            feasible: false,
            ari: None,
            mega_flag: false,
            micro_count: 0,
            seed,
            graph_seed,
            n_vertices: 0,
            k_clusters: 0,
            n_vars: 0,
            energy: None,
            unassigned: 0,
            multi_assigned: 0,
            cluster_sizes: Vec::new(),
            labels: Vec::new(),
            time_to_target_s: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub provenance: Provenance,
    pub rows: Vec<BenchRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ok = r.error.is_none();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.name,
                r.model,
                r.solver.as_str(),
                fmt_opt(r.time_s),
                fmt_opt(r.best_objective),
                if ok { r.feasible.to_string() } else { String::new() },
                fmt_opt(r.ari),
                if ok { r.mega_flag.to_string() } else { String::new() },
                if ok { r.micro_count.to_string() } else { String::new() },
                r.seed,
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One grid per model, shaped like a solver-comparison table.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut models: Vec<Model> = Vec::new();
        for r in &self.rows {
            if !models.contains(&r.model) {
                models.push(r.model);
            }
        }
        let cell = |v: Option<f64>| v.map_or("–".to_string(), |x| format!("{x:.3}"));
        for model in models {
            let _ = writeln!(out, "### Run times and objective values, {model}\n");
            out.push_str("| Name | Anneal time (s) | Exact time (s) | Time ratio | Best anneal | Best exact | Obj ratio | Feasible | ARI |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            let mut names: Vec<&str> = Vec::new();
            for r in self.rows.iter().filter(|r| r.model == model) {
                if !names.contains(&r.name.as_str()) {
                    names.push(&r.name);
                }
            }
            for name in names {
                let find = |s: Solver| {
                    self.rows
                        .iter()
                        .find(|r| r.model == model && r.name == name && r.solver == s)
                };
                let a = find(Solver::Anneal);
                let e = find(Solver::Exact);
                let at = a.and_then(|r| r.time_s);
                let et = e.and_then(|r| r.time_s);
                let ao = a.and_then(|r| r.best_objective);
                let eo = e.and_then(|r| r.best_objective);
                let ratio = |x: Option<f64>, y: Option<f64>| match (x, y) {
                    (Some(x), Some(y)) if y != 0.0 => Some(x / y),
                    _ => None,
                };
                let _ = writeln!(
                    out,
                    "| {name} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    cell(at),
                    cell(et),
                    cell(ratio(at, et)),
                    cell(ao),
                    cell(eo),
                    ratio(ao, eo).map_or("–".into(), |r| format!("{r:?}")),
                    a.map_or("–".into(), |r| r.feasible.to_string()),
                    cell(a.and_then(|r| r.ari)),
                );
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Csv => Ok(self.to_csv()),
            ReportFormat::Json => self.to_json(),
            ReportFormat::Markdown => Ok(self.to_markdown()),
        }
    }

    /// Writes `report.<ext>` for every requested format; returns the paths.
    pub fn write_outputs(&self, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        formats
            .iter()
            .map(|&f| {
                let path = dir.join(format!("report.{}", f.extension()));
                fs::write(&path, self.render(f)?).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

/// Runs every `(graph, model)` pair in config order. Per-row failures are
/// recorded in the report and do not abort the run.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let graphs = config.resolved_graphs()?;
    let mut rows = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        for (mi, m) in config.models.iter().enumerate() {
            let seed = derive_seed(config.schedule.seed, ((gi as u64) << 16) | mi as u64);
            match bench_pair(config, g, m, seed) {
                Ok(mut r) => rows.append(&mut r),
                Err(e) => rows.push(BenchRow::failed(&g.name, m.model, Solver::Anneal, seed, g.sbm.seed, &e)),
            }
        }
    }
    Ok(BenchReport {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        },
        rows,
    })
}

fn bench_pair(config: &BenchConfig, g: &NamedGraph, m: &ModelSpec, seed: u64) -> Result<Vec<BenchRow>> {
    let planted = generate_sbm(&g.sbm)?;
    let d = distance_matrix(&planted.graph);
    let params = m.params(g.k());
    let problem = build_qubo(&d, &params)?;
    let n = d.n();
    let k = params.k_clusters;

    let evaluate = |solver: Solver, state: &[u8], energy: f64, time: f64, row_seed: u64| -> Result<BenchRow> {
        let violations = one_hot_violations(state, n, k)?;
        let assignment = match config.decode {
            DecodeMode::Strict => decode(state, n, k, DecodePolicy::Strict)?,
            DecodeMode::Repair => decode(state, n, k, DecodePolicy::Repair(&d))?,
        };
        let deg = degeneracy_report(&assignment, config.thresholds);
        Ok(BenchRow {
            name: g.name.clone(),
            model: m.model,
            solver,
            time_s: match config.timing {
                Timing::Wall => Some(time),
                Timing::Omit => None,
            },
            best_objective: Some(objective_value(&d, &assignment)?),
            feasible: violations.is_feasible(),
            ari: Some(adjusted_rand_index(assignment.labels(), &planted.labels)?),
            mega_flag: deg.mega_cluster_flag,
            micro_count: deg.micro_cluster_count,
            seed: row_seed,
            graph_seed: g.sbm.seed,
            n_vertices: n,
            k_clusters: k,
            n_vars: problem.n_vars(),
            energy: Some(energy),
            unassigned: violations.unassigned,
            multi_assigned: violations.multi_assigned,
            cluster_sizes: assignment.cluster_sizes(),
            labels: assignment.labels().to_vec(),
            time_to_target_s: None,
            error: None,
        })
    };

    let schedule = AnnealSchedule {
        seed,
        time_budget: Some(config.time_budget),
        ..config.schedule.clone()
    };
    let result = anneal(&problem, &schedule)?;
    let mut anneal_row = evaluate(
        Solver::Anneal,
        &result.best_state,
        result.best_energy,
        result.wall_time,
        seed,
    )?;

    let mut rows = Vec::new();
    if problem.n_vars() <= config.exact_cap {
        let start = Instant::now();
        let exact = solve_exact(&problem, config.exact_cap);
        let elapsed = start.elapsed().as_secs_f64();
        match exact {
            Ok(ex) => {
                let state = &ex.optimal_states[0];
                let row = evaluate(Solver::Exact, state, ex.optimal_energy, elapsed, g.sbm.seed)?;
                if config.timing == Timing::Wall {
                    anneal_row.time_to_target_s =
                        time_to_target(&problem, &schedule, ex.optimal_energy, config.target_budget)
                            .ok()
                            .map(|hit| hit.seconds);
                }
                rows.push(anneal_row);
                rows.push(row);
            }
            Err(e) => {
                rows.push(anneal_row);
                rows.push(BenchRow::failed(
                    &g.name,
                    m.model,
                    Solver::Exact,
                    g.sbm.seed,
                    g.sbm.seed,
                    &e,
                ));
            }
        }
    } else {
        rows.push(anneal_row);
    }
    Ok(rows)
}
