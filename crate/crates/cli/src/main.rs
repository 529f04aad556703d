//! `hfd`: local hypergraph clustering by flow diffusion.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 duality gap not reached.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperflow::experiment::{choose_seeds, run_seed, summarize, SeedRun, Summary};
use hyperflow::hsbm::{calibrate_q, generate, HsbmParams};
use hyperflow::io::{
    label_set, parse_cutcost, read_embedding, read_hypergraph, read_labels, read_node_set, resolve_nodes,
    write_embedding, write_hypergraph, write_labels, write_node_set, write_profile, write_trace,
};
use hyperflow::rounding::{evaluate, rank_nodes, sweep_cut};
use hyperflow::solver::{am_solve, check_locality, make_source, LocalityReport, StopReason};
use hyperflow::{CostModel, CutCost, DiffusionConfig, Hypergraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("duality gap not reached: {0}")]
    GapNotReached(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::GapNotReached(_) => 4,
        }
    }
}

impl From<hyperflow::Error> for CliError {
    fn from(e: hyperflow::Error) -> Self {
        use hyperflow::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnsupportedCombination { .. } | E::Unachievable(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "hfd", version, about = "Local hypergraph clustering by flow diffusion")]
struct Cli {
    /// Worker threads; 1 gives bit-for-bit reproducible runs.
    #[arg(long, global = true, env = "HFD_THREADS")]
    threads: Option<usize>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a two-block hypergraph stochastic block model.
    Generate(GenerateArgs),
    /// Diffuse mass from seed nodes and write the node embedding.
    Diffuse(DiffuseArgs),
    /// Round an embedding by sweep cut.
    Sweep(SweepArgs),
    /// Score a predicted cluster against labels.
    Eval(EvalArgs),
    /// Print the highest-ranked nodes of an embedding.
    Rank(RankArgs),
    /// Run a multi-seed experiment described by a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Hyperedge list: one hyperedge per line.
    #[arg(long)]
    graph: PathBuf,
    /// Per-hyperedge weights, one per line.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Motif role order of every hyperedge's four nodes.
    #[arg(long)]
    roles: Option<PathBuf>,
    /// unit, cardinality, motif4, motif4:G1,G2 or custom:PATH.
    #[arg(long, default_value = "unit")]
    cutcost: String,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Probability of a hyperedge inside a block.
    #[arg(long)]
    p: f64,
    /// Comma-separated inter-block probabilities, one per smaller-side cardinality 1..=k/2.
    #[arg(long, value_delimiter = ',', conflicts_with = "conductance")]
    q: Option<Vec<f64>>,
    /// Choose q1 (other q zero) so the first block has this expected unit conductance.
    #[arg(long)]
    conductance: Option<f64>,
    /// Size of the first block (default n/2).
    #[arg(long)]
    first_block: Option<usize>,
    /// Assign block labels by random permutation.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output hyperedge list.
    #[arg(long)]
    out: PathBuf,
    /// Output `id label` file.
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args)]
struct DiffuseArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated seed node ids.
    #[arg(long, value_delimiter = ',', required_unless_present = "seed_file")]
    seeds: Vec<String>,
    /// File listing seed node ids.
    #[arg(long)]
    seed_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Source mass as a multiple of the reference volume.
    #[arg(long, default_value_t = 3.0)]
    t: f64,
    /// Node set whose volume is the mass reference (default: the seeds).
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    /// Output `id,x` CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Solver report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Embedding `id,x` CSV.
    #[arg(long)]
    x: PathBuf,
    /// Output profile CSV.
    #[arg(long)]
    out: PathBuf,
    /// Output best node set.
    #[arg(long)]
    best: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Predicted node set.
    #[arg(long)]
    pred: PathBuf,
    /// `id label` file.
    #[arg(long)]
    labels: PathBuf,
    /// Label of the ground-truth cluster.
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
}

/// Experiment description read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    graph: GraphSource,
    #[serde(default = "default_cutcost")]
    cutcost: String,
    #[serde(default)]
    diffusion: DiffusionConfig,
    /// Number of single-node seeds drawn from the target.
    seeds: usize,
    #[serde(default)]
    seed_rng: u64,
    /// Per-seed CSV.
    output: PathBuf,
    /// Summary JSON.
    #[serde(default)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GraphSource {
    Hsbm {
        #[serde(flatten)]
        params: HsbmParams,
        /// Calibrate q1 to this expected unit conductance, overriding `q`.
        #[serde(default)]
        conductance: Option<f64>,
        /// Block used as the target (0 or 1).
        #[serde(default)]
        target_block: usize,
    },
    File {
        edges: PathBuf,
        #[serde(default)]
        weights: Option<PathBuf>,
        #[serde(default)]
        roles: Option<PathBuf>,
        labels: PathBuf,
        target: String,
    },
}

fn default_cutcost() -> String {
    "unit".into()
}

#[derive(Serialize)]
struct DiffuseReport<'a> {
    config: &'a DiffusionConfig,
    cutcost: &'a str,
    seeds: Vec<String>,
    total_mass: f64,
    iterations: usize,
    stop_reason: StopReason,
    primal: f64,
    dual: f64,
    relative_gap: f64,
    support_size: usize,
    locality: LocalityReport,
}

#[derive(Serialize)]
struct SweepReport {
    best_conductance: f64,
    best_size: usize,
    best_volume: f64,
}

#[derive(Serialize)]
struct ExperimentReport<'a> {
    config: &'a ExperimentConfig,
    target_size: usize,
    target_conductance: f64,
    summary: Summary,
}

/// Reads a hypergraph and its cut-cost, scaling weights by the table normaliser.
fn load_graph(args: &GraphArgs) -> Result<(Hypergraph, CostModel)> {
    load(&args.graph, args.weights.as_deref(), args.roles.as_deref(), &args.cutcost)
}

fn load(edges: &Path, weights: Option<&Path>, roles: Option<&Path>, cutcost: &str) -> Result<(Hypergraph, CostModel)> {
    let (cost, scale) = parse_cutcost(cutcost)?;
    let mut h = read_hypergraph(edges, weights, roles)?;
    if scale != 1.0 {
        let ids: Vec<String> = (0..h.num_nodes()).map(|v| h.node_label(v)).collect();
        let edges: Vec<Vec<usize>> = h.edges().map(<[usize]>::to_vec).collect();
        let theta = h.theta().iter().map(|t| t * scale).collect();
        h = Hypergraph::new(h.num_nodes(), edges, Some(theta))?.with_node_ids(ids)?;
    }
    let costs = CostModel::Uniform(cost);
    costs.validate(&h)?;
    log::info!("loaded {} nodes, {} hyperedges ({} singletons dropped)", h.num_nodes(), h.num_edges(), h.dropped_singletons());
    Ok((h, costs))
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let q = match (&a.q, a.conductance) {
        (Some(q), _) => q.clone(),
        (None, Some(phi)) => {
            let mut q = vec![0.0; a.k / 2];
            if let Some(first) = q.first_mut() {
                *first = calibrate_q(a.k, a.n, a.p, phi, &CutCost::Unit)?;
            }
            q
        }
        (None, None) => return Err(CliError::Usage("either --q or --conductance is required".into())),
    };
    let mut params = HsbmParams::new(a.k, a.n, a.p, q, a.seed);
    params.first_block = a.first_block;
    params.shuffle_labels = a.shuffle;
    let inst = generate(&params)?;
    write_hypergraph(&inst.hypergraph, &a.out, None)?;
    write_labels(&inst.hypergraph, &inst.labels, &a.labels)?;
    log::info!("wrote {} hyperedges on {} nodes", inst.hypergraph.num_edges(), inst.hypergraph.num_nodes());
    Ok(())
}

fn cmd_diffuse(a: &DiffuseArgs) -> Result<()> {
    let (h, costs) = load_graph(&a.graph)?;
    let seeds = match &a.seed_file {
        Some(path) => read_node_set(path, &h)?,
        None => resolve_nodes(&h, &a.seeds)?,
    };
    let reference = match &a.reference {
        Some(path) => read_node_set(path, &h)?,
        None => seeds.clone(),
    };
    let cfg = DiffusionConfig { sigma: a.sigma, p: a.p, max_iters: a.max_iters, gap_tol: a.gap_tol, seed_mass_factor: a.t, ..Default::default() };
    cfg.validate()?;
    let total_mass = a.t * h.volume(&reference);
    let source = make_source(&h, &seeds, total_mass)?;
    let state = am_solve(&h, &costs, &source, &cfg)?;
    write_embedding(&h, &state.x, &a.out)?;
    if let Some(path) = &a.trace {
        write_trace(&state.trace, path)?;
    }
    let report = DiffuseReport {
        config: &cfg,
        cutcost: &a.graph.cutcost,
        seeds: seeds.iter().map(|v| h.node_label(v)).collect(),
        total_mass,
        iterations: state.iterations,
        stop_reason: state.stop_reason,
        primal: state.primal,
        dual: state.dual,
        relative_gap: state.relative_gap(),
        support_size: state.support(cfg.support_eps).len(),
        locality: check_locality(&h, &state, &source.delta, cfg.support_eps),
    };
    write_json(&report, a.report.as_deref())?;
    match state.stop_reason {
        StopReason::GapReached | StopReason::NoExcess => Ok(()),
        other => Err(CliError::GapNotReached(format!(
            "stopped with {other:?} at relative gap {:.3e} (tolerance {:.1e})",
            state.relative_gap(),
            cfg.gap_tol
        ))),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let (h, costs) = load_graph(&a.graph)?;
    let x = read_embedding(&a.x, &h)?;
    let sweep = sweep_cut(&h, &costs, &x)?;
    write_profile(&sweep, &a.out)?;
    if let Some(path) = &a.best {
        write_node_set(&h, &sweep.best, path)?;
    }
    let report = SweepReport { best_conductance: sweep.best_conductance, best_size: sweep.best.len(), best_volume: h.volume(&sweep.best) };
    write_json(&report, None)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let (h, costs) = load_graph(&a.graph)?;
    let pred = read_node_set(&a.pred, &h)?;
    let labels = read_labels(&a.labels, &h)?;
    let truth = label_set(&labels, &a.target);
    if truth.is_empty() {
        return Err(CliError::Data(format!("no node carries label {:?}", a.target)));
    }
    write_json(&evaluate(&h, &costs, &pred, &truth)?, None)
}

fn cmd_rank(a: &RankArgs) -> Result<()> {
    let h = read_hypergraph(&a.graph, None, None)?;
    let x = read_embedding(&a.x, &h)?;
    let mut out = std::io::stdout().lock();
    for v in rank_nodes(&x, None).into_iter().take(a.top) {
        writeln!(out, "{},{:e}", h.node_label(v), x[v])?;
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    config.diffusion.validate()?;
    let (h, costs, target) = match &mut config.graph {
        GraphSource::Hsbm { params, conductance, target_block } => {
            if let Some(phi) = *conductance {
                let mut q = vec![0.0; params.k / 2];
                if let Some(first) = q.first_mut() {
                    *first = calibrate_q(params.k, params.n, params.p, phi, &CutCost::Unit)?;
                }
                params.q = q;
            }
            let inst = generate(params)?;
            let (cost, scale) = parse_cutcost(&config.cutcost)?;
            if scale != 1.0 {
                return Err(CliError::Usage("custom cut-cost tables need a hypergraph file".into()));
            }
            let costs = CostModel::Uniform(cost);
            costs.validate(&inst.hypergraph)?;
            let target = inst.block(*target_block);
            (inst.hypergraph, costs, target)
        }
        GraphSource::File { edges, weights, roles, labels, target } => {
            let (h, costs) = load(edges, weights.as_deref(), roles.as_deref(), &config.cutcost)?;
            let labels = read_labels(labels, &h)?;
            let set = label_set(&labels, target);
            (h, costs, set)
        }
    };
    if target.is_empty() {
        return Err(CliError::Data("target cluster is empty".into()));
    }
    let seeds = choose_seeds(&target, config.seeds, config.seed_rng);
    log::info!("running {} seeds on {} nodes, {} hyperedges", seeds.len(), h.num_nodes(), h.num_edges());
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&s| run_seed(&h, &costs, &target, s, &config.diffusion).map(|(run, _)| run))
        .collect::<std::result::Result<_, _>>()?;
    write_runs(&h, &runs, &config)?;
    let report = ExperimentReport {
        config: &config,
        target_size: target.len(),
        target_conductance: h.conductance(&costs, &target)?,
        summary: summarize(&runs),
    };
    write_json(&report, config.summary.as_deref())
}

fn write_runs(h: &Hypergraph, runs: &[SeedRun], config: &ExperimentConfig) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(&config.output)?);
    writeln!(out, "# config {}", serde_json::to_string(config)?)?;
    writeln!(out, "seed,f1,precision,recall,conductance,cluster_size,iterations,stop_reason,relative_gap")?;
    for r in runs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:?},{:e}",
            h.node_label(r.seed),
            r.f1,
            r.precision,
            r.recall,
            r.output_conductance,
            r.cluster_size,
            r.iterations,
            r.stop_reason,
            r.relative_gap
        )?;
    }
    let s = summarize(runs);
    for (name, f1, cond) in [("median", s.f1.median, s.conductance.median), ("p25", s.f1.p25, s.conductance.p25), ("p75", s.f1.p75, s.conductance.p75)] {
        writeln!(out, "# {name} f1={f1} conductance={cond}")?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Diffuse(a) => cmd_diffuse(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
