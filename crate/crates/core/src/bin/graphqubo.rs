//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use graphqubo::anneal::{anneal, time_to_target, AcceptanceMode, AnnealSchedule, StopMode};
use graphqubo::bench::{self, run_bench, BenchConfig, BenchReport, ReportFormat, Timing};
use graphqubo::clustering::{decode, one_hot_violations, DecodePolicy};
use graphqubo::distances::distance_matrix;
use graphqubo::exact::{solve_exact, solve_exact_labels, DEFAULT_EXACT_CAP};
use graphqubo::graph::{generate_sbm, Graph, SbmSpec};
use graphqubo::qubo::{build_qubo, Model, ModelParams, QuboProblem};
use graphqubo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "graphqubo",
    version,
    about = "Graph clustering via QUBO and simulated annealing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every subcommand accepts.
#[derive(Args, Clone, Default)]
struct Common {
    /// Random seed (overrides any seed in the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file for this subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted, except for `bench`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a stochastic-block-model graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Compute the all-pairs neighborhood distance matrix as CSV.
    Distances(DistancesArgs),
    /// Compile a clustering model into a QUBO JSON container.
    BuildQubo(BuildQuboArgs),
    /// Anneal a QUBO and write the result as JSON.
    Anneal(AnnealArgs),
    /// Solve a small QUBO exactly by enumeration.
    Exact(ExactArgs),
    /// Run the benchmark protocol and write reports.
    Bench(BenchArgs),
    /// Re-render a JSON bench report as CSV, Markdown or JSON.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    /// Graph family: L4, L8, H4, H8 or VH8. Alternatively pass an SBM spec via --config.
    #[arg(long)]
    preset: Option<String>,
    /// Also write planted labels as `vertex,cluster` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct DistancesArgs {
    #[command(flatten)]
    common: Common,
    /// Edge-list input.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// model1 (distance only) or model2 (adds the size regularizer).
    #[arg(long, value_parser = parse_model)]
    model: Option<Model>,
    /// Number of clusters K.
    #[arg(long)]
    k: Option<usize>,
    /// One-hot penalty weight P.
    #[arg(long)]
    penalty: Option<f64>,
    /// Size regularizer weight (Model 2).
    #[arg(long)]
    lambda: Option<f64>,
    /// Target cluster size (default N/K).
    #[arg(long)]
    u_bar: Option<f64>,
}

impl ModelArgs {
    /// Config file (a `ModelParams` JSON) overridden by flags.
    fn params(&self, config: Option<ModelParams>) -> Result<ModelParams> {
        let mut p = match (config, self.k) {
            (Some(p), _) => p,
            (None, Some(k)) => ModelParams::model1(k),
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "number of clusters required: pass --k or a --config".into(),
                ))
            }
        };
        if let Some(m) = self.model {
            p.model = m;
        }
        if let Some(k) = self.k {
            p.k_clusters = k;
        }
        if let Some(v) = self.penalty {
            p.penalty_p = v;
        }
        if let Some(v) = self.lambda {
            p.lambda_reg = v;
        }
        if self.u_bar.is_some() {
            p.u_bar = self.u_bar;
        }
        p.validate()?;
        Ok(p)
    }
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct BuildQuboArgs {
    #[command(flatten)]
    common: Common,
    /// Edge-list input.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Schedule,
    WallClock,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Independent chains per run.
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    sweeps_per_temperature: Option<usize>,
    /// Geometric cooling factor, in (0, 1).
    #[arg(long)]
    cooling_ratio: Option<f64>,
    /// Starting temperature (default: largest |q_uv|).
    #[arg(long)]
    t_initial: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Offset increment applied after a sweep with no accepted flip.
    #[arg(long)]
    offset_escape: Option<f64>,
    /// Acceptance rule: parallel trial or one-flip-at-a-time Metropolis.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Stop after one cooling pass or keep restarting until the budget.
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
}

impl ScheduleArgs {
    fn apply(&self, mut s: AnnealSchedule, seed: Option<u64>) -> AnnealSchedule {
        if let Some(v) = seed {
            s.seed = v;
        }
        if self.budget.is_some() {
            s.time_budget = self.budget;
        }
        if let Some(v) = self.replicas {
            s.replicas = v;
        }
        if let Some(v) = self.sweeps_per_temperature {
            s.sweeps_per_temperature = v;
        }
        if let Some(v) = self.cooling_ratio {
            s.cooling_ratio = v;
        }
        if self.t_initial.is_some() {
            s.t_initial = self.t_initial;
        }
        if self.t_final.is_some() {
            s.t_final = self.t_final;
        }
        if self.offset_escape.is_some() {
            s.offset_escape = self.offset_escape;
        }
        if let Some(m) = self.mode {
            s.mode = match m {
                ModeArg::Parallel => AcceptanceMode::ParallelTrial,
                ModeArg::Sequential => AcceptanceMode::Sequential,
            };
        }
        if let Some(m) = self.stop {
            s.stop = match m {
                StopArg::Schedule => StopMode::Schedule,
                StopArg::WallClock => StopMode::WallClock,
            };
        }
        s
    }
}

#[derive(Args)]
struct AnnealArgs {
    #[command(flatten)]
    common: Common,
    /// QUBO JSON container.
    #[arg(long)]
    qubo: PathBuf,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Write the best-so-far energy trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run until this energy is reached (or the budget, default 60 s, expires).
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    common: Common,
    /// QUBO JSON container to enumerate.
    #[arg(long, conflicts_with = "graph")]
    qubo: Option<PathBuf>,
    /// Edge list; builds the model from --k/--model flags first.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Enumerate only one-hot labelings of the direct objective (needs --graph).
    #[arg(long, requires = "graph")]
    label_space: bool,
    /// Largest number of enumerated bits.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Preset graph set (`paper` or `paper-small`), overrides the config's preset.
    #[arg(long)]
    preset: Option<String>,
    /// Annealer budget per row in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Report formats, comma separated: csv, json, md.
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
    /// Leave the time_s column empty for byte-reproducible reports.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    /// JSON report written by `bench`.
    #[arg(long)]
    input: PathBuf,
    /// csv, json or md.
    #[arg(long, default_value = "md")]
    format: String,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut spec: SbmSpec = match (&args.preset, &args.common.config) {
        (Some(name), _) => bench::preset_graph(name, args.common.seed.unwrap_or(0))?.sbm,
        (None, Some(path)) => read_json(path)?,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "pass --preset <name> or --config <sbm.json>".into(),
            ))
        }
    };
    if let Some(seed) = args.common.seed {
        spec.seed = seed;
    }
    let planted = generate_sbm(&spec)?;
    write_output(args.common.out.as_deref(), &planted.graph.to_edge_list())?;
    if let Some(path) = &args.labels {
        let mut csv = String::from("vertex,cluster\n");
        for (i, c) in planted.labels.iter().enumerate() {
            csv.push_str(&format!("{i},{c}\n"));
        }
        write_output(Some(path), &csv)?;
    }
    eprintln!(
        "generated {} vertices, {} edges, {} blocks (seed {})",
        planted.graph.n_vertices(),
        planted.graph.n_edges(),
        spec.n_blocks(),
        spec.seed
    );
    Ok(())
}

#[derive(serde::Deserialize, Default)]
struct GraphConfig {
    graph: Option<PathBuf>,
}

fn distances(args: DistancesArgs) -> Result<()> {
    let config: GraphConfig = match &args.common.config {
        Some(path) => read_json(path)?,
        None => GraphConfig::default(),
    };
    let path = args
        .graph
        .or(config.graph)
        .ok_or_else(|| Error::InvalidParameter("pass --graph <edges>".into()))?;
    let g = Graph::load_edge_list(&path)?;
    write_output(args.common.out.as_deref(), &distance_matrix(&g).to_csv())
}

fn build(args: BuildQuboArgs) -> Result<()> {
    let config: Option<ModelParams> = args.common.config.as_deref().map(read_json).transpose()?;
    let params = args.model.params(config)?;
    let g = Graph::load_edge_list(&args.graph)?;
    let p = build_qubo(&distance_matrix(&g), &params)?;
    write_output(args.common.out.as_deref(), &p.to_json()?)
}

fn run_anneal(args: AnnealArgs) -> Result<()> {
    let base: AnnealSchedule = match &args.common.config {
        Some(path) => read_json(path)?,
        None => AnnealSchedule::default(),
    };
    let schedule = args.schedule.apply(base, args.common.seed);
    let p = QuboProblem::load_json(&args.qubo)?;
    let (result, seconds) = match args.target {
        Some(target) => {
            let budget = schedule.time_budget.unwrap_or(60.0);
            let hit = time_to_target(&p, &schedule, target, budget)?;
            (hit.result, Some(hit.seconds))
        }
        None => (anneal(&p, &schedule)?, None),
    };
    if let Some(path) = &args.trace {
        write_output(Some(path), &result.trace_csv())?;
    }
    let feasible = p
        .index_map()
        .map(|m| one_hot_violations(&result.best_state, m.n_vertices, m.k_clusters))
        .transpose()?;
    #[derive(Serialize)]
    struct Output<'a> {
        #[serde(flatten)]
        result: &'a graphqubo::AnnealResult,
        one_hot: Option<graphqubo::clustering::Violations>,
        time_to_target_s: Option<f64>,
    }
    write_output(
        args.common.out.as_deref(),
        &to_json(&Output {
            result: &result,
            one_hot: feasible,
            time_to_target_s: seconds,
        })?,
    )?;
    eprintln!(
        "best energy {} after {} sweeps ({:.3} s)",
        result.best_energy, result.sweeps_executed, result.wall_time
    );
    Ok(())
}

fn exact(args: ExactArgs) -> Result<()> {
    let result = match (&args.qubo, &args.graph) {
        (Some(path), _) => solve_exact(&QuboProblem::load_json(path)?, args.cap)?,
        (None, Some(path)) => {
            let config: Option<ModelParams> = args.common.config.as_deref().map(read_json).transpose()?;
            let params = args.model.params(config)?;
            let d = distance_matrix(&Graph::load_edge_list(path)?);
            if args.label_space {
                solve_exact_labels(&d, &params, args.cap)?
            } else {
                let result = solve_exact(&build_qubo(&d, &params)?, args.cap)?;
                if let Some(x) = result.optimal_states.first() {
                    if let Ok(a) = decode(x, d.n(), params.k_clusters, DecodePolicy::Strict) {
                        eprintln!("first optimum labels: {:?}", a.labels());
                    }
                }
                result
            }
        }
        (None, None) => {
            return Err(Error::InvalidParameter("pass --qubo or --graph".into()));
        }
    };
    eprintln!(
        "optimum {} ({} minimizers, {} states)",
        result.optimal_energy,
        result.optimal_states.len(),
        result.states_enumerated
    );
    write_output(args.common.out.as_deref(), &to_json(&result)?)
}

fn run_bench_cmd(args: BenchArgs) -> Result<()> {
    let mut config = match &args.common.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if args.preset.is_some() {
        config.preset = args.preset.clone();
    }
    if let Some(seed) = args.common.seed {
        config.seed = seed;
        config.schedule.seed = seed;
    }
    if let Some(b) = args.budget {
        config.time_budget = b;
    }
    if args.no_timing {
        config.timing = Timing::Omit;
    }
    if !args.format.is_empty() {
        config.report_format = args
            .format
            .iter()
            .map(|f| f.parse())
            .collect::<Result<Vec<ReportFormat>>>()?;
    }
    if let Some(out) = &args.common.out {
        config.output_dir = Some(out.clone());
    }
    let report = run_bench(&config)?;
    match &config.output_dir {
        Some(dir) => {
            for path in report.write_outputs(dir, &config.report_format)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{}", report.render(config.report_format[0])?),
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| Error::Io {
        path: args.input.clone(),
        source: e,
    })?;
    let report = BenchReport::from_json(&text)?;
    let format: ReportFormat = args.format.parse()?;
    write_output(args.common.out.as_deref(), &report.render(format)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Distances(a) => distances(a),
        Command::BuildQubo(a) => build(a),
        Command::Anneal(a) => run_anneal(a),
        Command::Exact(a) => exact(a),
        Command::Bench(a) => run_bench_cmd(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
