//! Benchmark CLI: generate graphs, run metered seeding algorithms against
//! them, and sweep query budgets into CSV/JSON result tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use queryim::cascade::influence_mc;
use queryim::graph::{
    gen_clique_circle, gen_clique_plus_isolated, gen_erdos_renyi, gen_preferential_attachment,
    gen_star,
};
use queryim::seed::{probe_and_seed, seed_from_sketch};
use queryim::{Graph, Oracle, QueryLedger, RngStream, Sketch};
use queryim_cli::config::{
    AlgorithmConfig, ExperimentConfig, GraphConfig, ModelConfig, ModelKind, RunConfig,
};
use queryim_cli::experiment::{self, run_experiment, RunRecord};
use queryim_cli::bound;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "queryim",
    version,
    about = "Influence-maximization benchmark under metered network queries",
    long_about = "Runs seeding algorithms that pay for what they learn about a hidden \
contact network, either by surveying nodes for their edges or by observing seeded \
cascades, and reports chosen seeds, evaluated spread, and the exact query bill."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a benchmark graph as an edge-list file.
    Gen(GenArgs),
    /// Survey-probe the hidden graph into a sketch, then seed from it.
    ProbeSeed(ProbeSeedArgs),
    /// Seed by adopter frequency over paid cascade observations.
    SpreadSeed(SpreadSeedArgs),
    /// Spread seeding for the linear-threshold model via reversed walks.
    LtSpreadSeed(LtSpreadSeedArgs),
    /// Full-information lazy greedy with Monte Carlo evaluation.
    Greedy(GreedyArgs),
    /// Uniform random seeds; the zero-information baseline.
    Random(BasicArgs),
    /// Seed random neighbors of random nodes; pays nomination queries.
    OneHop(BasicArgs),
    /// Highest-degree seeds; full information, zero queries.
    Degree(BasicArgs),
    /// Evaluate the influence of a given seed set by simulation.
    Eval(EvalArgs),
    /// Closed-form probing parameters and the query-cost ceiling.
    Bound(BoundArgs),
    /// Run a config-driven sweep: CSV rows plus a JSON summary.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct GraphArg {
    /// Edge-list file: `u v [prob]` per line, `#` comments, bare ids declare
    /// isolated nodes.
    #[arg(long)]
    graph: PathBuf,
    /// Uniform cascade probability, overriding any file probabilities.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct CommonRun {
    /// Seed-set size.
    #[arg(long, short)]
    k: usize,
    /// Independent repetitions; each becomes one output row.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Simulations used to evaluate the chosen seeds.
    #[arg(long, default_value_t = 500)]
    eval_sims: usize,
    /// Root RNG key; a rerun with the same key is identical.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct GenArgs {
    /// erdos-renyi | clique-circle | clique-isolated | star | pref-attach
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// erdos-renyi edge probability.
    #[arg(long)]
    edge_prob: Option<f64>,
    /// clique-circle community fraction.
    #[arg(long)]
    mu: Option<f64>,
    /// clique-isolated clique size.
    #[arg(long)]
    clique: Option<usize>,
    /// pref-attach links per arriving node.
    #[arg(long)]
    attach: Option<usize>,
    /// star: orient edges away from the center.
    #[arg(long, default_value_t = false)]
    directed_out: bool,
    /// Structural randomness of the generator.
    #[arg(long, default_value_t = 1)]
    gen_seed: u64,
    /// Bake this uniform cascade probability into the file.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProbeSeedArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    common: CommonRun,
    /// Accuracy knob the probing parameters are derived from.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Confidence knob of the derivation.
    #[arg(long)]
    delta: Option<f64>,
    /// Candidate-sampling accuracy of the seeder; defaults to epsilon / 7.
    #[arg(long)]
    eps_prime: Option<f64>,
    /// Fraction of nodes surveyed, in (0, 1]; overrides the derived value.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of sketch copies; overrides the derived value.
    #[arg(long = "T")]
    copies: Option<usize>,
    /// Component-size cap; overrides the derived value.
    #[arg(long)]
    tau: Option<usize>,
    /// Save the probed sketch artifact (single repetition only).
    #[arg(long)]
    save_sketch: Option<PathBuf>,
    /// Skip probing and seed from this saved sketch artifact instead.
    #[arg(long, conflicts_with_all = ["save_sketch", "rho", "copies", "tau", "epsilon", "delta"])]
    from_sketch: Option<PathBuf>,
}

#[derive(Args)]
struct SpreadSeedArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    common: CommonRun,
    /// Cascade observations per selection round.
    #[arg(long)]
    rounds_rho: Option<usize>,
    /// Total observation budget, split max(1, budget / k) per round.
    #[arg(long, conflicts_with = "rounds_rho")]
    budget: Option<u64>,
    /// Derive the per-round count from this accuracy when no explicit count
    /// or budget is given.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct LtSpreadSeedArgs {
    #[command(flatten)]
    inner: SpreadSeedArgs,
    /// Linear-threshold weight scale: in-edges of v weigh scale / in_degree(v).
    #[arg(long, default_value_t = 1.0)]
    lt_scale: f64,
}

#[derive(Args)]
struct GreedyArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    common: CommonRun,
    /// Monte Carlo evaluations per candidate inspection.
    #[arg(long, default_value_t = 500)]
    sims: usize,
}

#[derive(Args)]
struct BasicArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    common: CommonRun,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Comma-separated node ids.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<usize>,
    /// JSON file: either a bare id array or a result object with a "seeds"
    /// field.
    #[arg(long, conflicts_with = "seeds")]
    seeds_file: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    eval_sims: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, short)]
    k: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Uniform edge probability the expected terms are computed at.
    #[arg(long)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
#[command(after_long_help = CONFIG_HELP)]
struct SweepArgs {
    /// TOML experiment config; see the long help for the format.
    #[arg(long)]
    config: PathBuf,
    /// Override run.out: rows go to <out>.csv, the summary to <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override run.rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// Override run.eval_sims.
    #[arg(long)]
    eval_sims: Option<usize>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

const CONFIG_HELP: &str = "Config format (TOML):

[graph]                 exactly one of `file` or `generator`
file = \"net.edges\"      edge-list file: `u v [prob]` lines
generator = \"erdos-renyi\"   or clique-circle | clique-isolated | star | pref-attach
n = 2000                node count (generators)
edge_prob = 0.01        erdos-renyi
mu = 0.3                clique-circle
clique = 100            clique-isolated
attach = 2              pref-attach
directed_out = false    star orientation (default false)
gen_seed = 1            structural randomness (default 1)

[model]
kind = \"ic\"             ic (default) or lt
p = 0.1                 uniform cascade probability (required for generated
                        graphs under ic; file probabilities used otherwise)
lt_scale = 1.0          lt only: in-edges of v weigh lt_scale / in_degree(v)

[algorithm]
name = \"probe-seed\"     probe-seed | spread-seed | lt-spread-seed | greedy |
                        random | one-hop | degree
k = 5                   seeds to choose
epsilon = 0.5           accuracy knob (derives probing and spread counts)
delta = 1.0             confidence knob (probing)
eps_prime = 0.0714      seeder sampling accuracy (default epsilon / 7)
rho = 0.2               probing override: surveyed node fraction
copies = 10             probing override: sketch copies
tau = 50                probing override: component cap
rounds_rho = 100        spread queries per round
budget = 500            total spread budget, max(1, budget / k) per round
sims = 500              greedy: Monte Carlo evaluations per inspection

[sweep]                 optional
parameter = \"copies\"    copies | tau | rounds-rho | budget | k
values = [0, 1, 2, 4]   0 for copies/rounds-rho/budget runs the random
                        baseline at that point

[run]
repetitions = 50        rows per sweep point (default 50)
eval_sims = 500         evaluation simulations per row (default 500)
rng_seed = 0            root key; reruns are byte-identical (default 0)
out = \"results\"         optional output stem

[profit]                optional; adds a profit figure to every row
seed_cost = 10.0
query_cost = 1.0
revenue = 0.1
";

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::ProbeSeed(args) => cmd_probe_seed(args),
        Cmd::SpreadSeed(args) => cmd_spread_seed(args, None),
        Cmd::LtSpreadSeed(args) => cmd_spread_seed(args.inner, Some(args.lt_scale)),
        Cmd::Greedy(args) => {
            let algorithm = AlgorithmConfig {
                sims: Some(args.sims),
                ..algorithm_base("greedy", args.common.k)
            };
            run_flags(&args.graph, None, algorithm, &args.common)
        }
        Cmd::Random(args) => {
            run_flags(&args.graph, None, algorithm_base("random", args.common.k), &args.common)
        }
        Cmd::OneHop(args) => {
            run_flags(&args.graph, None, algorithm_base("one-hop", args.common.k), &args.common)
        }
        Cmd::Degree(args) => {
            run_flags(&args.graph, None, algorithm_base("degree", args.common.k), &args.common)
        }
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Bound(args) => cmd_bound(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    }
}

fn algorithm_base(name: &str, k: usize) -> AlgorithmConfig {
    AlgorithmConfig {
        name: name.to_string(),
        k,
        epsilon: None,
        delta: None,
        eps_prime: None,
        rho: None,
        copies: None,
        tau: None,
        rounds_rho: None,
        budget: None,
        sims: None,
    }
}

fn flags_config(
    graph: &GraphArg,
    lt_scale: Option<f64>,
    algorithm: AlgorithmConfig,
    common: &CommonRun,
) -> ExperimentConfig {
    let kind = if lt_scale.is_some() { ModelKind::Lt } else { ModelKind::Ic };
    ExperimentConfig {
        graph: GraphConfig {
            file: Some(graph.graph.clone()),
            generator: None,
            n: None,
            edge_prob: None,
            mu: None,
            clique: None,
            attach: None,
            directed_out: false,
            gen_seed: 1,
        },
        model: ModelConfig { kind, p: graph.p, lt_scale },
        algorithm,
        sweep: None,
        run: RunConfig {
            repetitions: common.reps,
            eval_sims: common.eval_sims,
            rng_seed: common.seed,
            out: None,
        },
        profit: None,
    }
}

/// Flag-driven single-algorithm run: one row per repetition.
fn run_flags(
    graph: &GraphArg,
    lt_scale: Option<f64>,
    algorithm: AlgorithmConfig,
    common: &CommonRun,
) -> Result<()> {
    let config = flags_config(graph, lt_scale, algorithm, common);
    let outcome = run_experiment(&config)?;
    emit_rows(&outcome.rows, common.format, common.out.as_deref())
}

fn emit_rows(rows: &[RunRecord], format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => experiment::csv_string(rows),
        OutputFormat::Json if rows.len() == 1 => {
            format!("{}\n", serde_json::to_string_pretty(&rows[0])?)
        }
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(rows)?),
    };
    write_or_print(out, &text)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut extra = json!({});
    let graph: Graph = match args.kind.as_str() {
        "erdos-renyi" => gen_erdos_renyi(
            args.n,
            args.edge_prob.context("erdos-renyi needs --edge-prob")?,
            args.gen_seed,
        )?,
        "clique-circle" => {
            let (graph, info) =
                gen_clique_circle(args.n, args.mu.context("clique-circle needs --mu")?, args.gen_seed)?;
            extra = json!({
                "clique_count": info.clique_count,
                "clique_size": info.clique_size,
                "ring": info.ring,
            });
            graph
        }
        "clique-isolated" => gen_clique_plus_isolated(
            args.n,
            args.clique.context("clique-isolated needs --clique")?,
            args.gen_seed,
        )?,
        "star" => gen_star(args.n, args.directed_out)?,
        "pref-attach" => gen_preferential_attachment(
            args.n,
            args.attach.context("pref-attach needs --attach")?,
            args.gen_seed,
        )?,
        other => bail!("unknown generator {other:?}"),
    };
    let graph = match args.p {
        Some(p) => graph.with_uniform_prob(p)?,
        None => graph,
    };
    let file = fs::File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    graph.write_edge_list(std::io::BufWriter::new(file))?;
    println!(
        "{}",
        json!({
            "kind": args.kind,
            "n": graph.n(),
            "edges": graph.edge_count(),
            "directed": graph.is_directed(),
            "out": args.out,
            "detail": extra,
        })
    );
    Ok(())
}

fn cmd_probe_seed(args: ProbeSeedArgs) -> Result<()> {
    if let Some(sketch_path) = &args.from_sketch {
        return probe_seed_from_sketch(&args, sketch_path);
    }
    if args.save_sketch.is_some() && args.common.reps != 1 {
        bail!("--save-sketch works with --reps 1 (each repetition probes its own sketch)");
    }
    let algorithm = AlgorithmConfig {
        epsilon: args.epsilon,
        delta: args.delta,
        eps_prime: args.eps_prime,
        rho: args.rho,
        copies: args.copies,
        tau: args.tau,
        ..algorithm_base("probe-seed", args.common.k)
    };
    if let Some(sketch_out) = &args.save_sketch {
        // Mirror the runner's stream discipline so the saved artifact is the
        // run the row reports: point 0, repetition 0, algorithm fork 0.
        let config = flags_config(&args.graph, None, algorithm.clone(), &args.common);
        let graph = config.build_graph()?;
        let params = algorithm.probe_params(graph.n())?;
        let oracle = Oracle::new(graph.clone());
        let rep_rng = RngStream::new(args.common.seed).fork(0).fork(0);
        let (sketch, _) =
            probe_and_seed(&oracle, &params, args.common.k, algorithm.eps_prime()?, &rep_rng.fork(0))?;
        let file = fs::File::create(sketch_out)
            .with_context(|| format!("creating {}", sketch_out.display()))?;
        sketch.save_json(std::io::BufWriter::new(file))?;
    }
    run_flags(&args.graph, None, algorithm, &args.common)
}

/// Seeds from a saved sketch artifact: no probing, so the paid bill is
/// whatever the probing run already reported.
fn probe_seed_from_sketch(args: &ProbeSeedArgs, sketch_path: &Path) -> Result<()> {
    let file = fs::File::open(sketch_path)
        .with_context(|| format!("opening {}", sketch_path.display()))?;
    let sketch = Sketch::load_json(std::io::BufReader::new(file))?;
    let eps_prime = args.eps_prime.context("--from-sketch needs --eps-prime")?;
    let common = &args.common;

    let config = flags_config(&args.graph, None, algorithm_base("probe-seed", common.k), common);
    let graph: Graph = config.build_graph()?;
    let rows = (0..common.reps)
        .map(|rep| {
            let rep_rng = RngStream::new(common.seed).fork(0).fork(rep as u64);
            let result = seed_from_sketch::<f64>(&sketch, common.k, eps_prime, &rep_rng.fork(0))?;
            let est = influence_mc(&graph, &result.seeds, common.eval_sims, &rep_rng.fork(1))?;
            Ok(RunRecord {
                sweep_param: "none".to_string(),
                sweep_value: 0,
                rep,
                algorithm: "probe-seed".to_string(),
                n: sketch.n(),
                k: common.k,
                rng_seed: rep_rng.key(),
                seeds: result.seeds,
                internal_value: result.sketch_value,
                spread_mean: Some(est.mean),
                spread_stderr: Some(est.stderr),
                ledger: QueryLedger::default(),
                total_queries: 0,
                revealed_nodes: 0,
                profit: None,
                wall_ms: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit_rows(&rows, common.format, common.out.as_deref())
}

fn cmd_spread_seed(args: SpreadSeedArgs, lt_scale: Option<f64>) -> Result<()> {
    let name = if lt_scale.is_some() { "lt-spread-seed" } else { "spread-seed" };
    let algorithm = AlgorithmConfig {
        epsilon: args.epsilon,
        rounds_rho: args.rounds_rho,
        budget: args.budget,
        ..algorithm_base(name, args.common.k)
    };
    run_flags(&args.graph, lt_scale, algorithm, &args.common)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let seeds = if let Some(path) = &args.seeds_file {
        parse_seeds_file(path)?
    } else if !args.seeds.is_empty() {
        args.seeds.clone()
    } else {
        bail!("give --seeds or --seeds-file");
    };
    let config = flags_config(
        &args.graph,
        None,
        algorithm_base("random", seeds.len().max(1)),
        &CommonRun {
            k: seeds.len().max(1),
            reps: 1,
            eval_sims: args.eval_sims,
            seed: args.seed,
            out: None,
            format: OutputFormat::Json,
        },
    );
    let graph = config.build_graph()?;
    let rng = RngStream::new(args.seed);
    let estimate = influence_mc(&graph, &seeds, args.eval_sims, &rng)?;
    let row = RunRecord {
        sweep_param: "none".to_string(),
        sweep_value: 0,
        rep: 0,
        algorithm: "eval".to_string(),
        n: graph.n(),
        k: seeds.len(),
        rng_seed: args.seed,
        seeds,
        internal_value: 0.0,
        spread_mean: Some(estimate.mean),
        spread_stderr: Some(estimate.stderr),
        ledger: QueryLedger::default(),
        total_queries: 0,
        revealed_nodes: 0,
        profit: None,
        wall_ms: 0.0,
    };
    emit_rows(&[row], args.format, args.out.as_deref())
}

fn parse_seeds_file(path: &Path) -> Result<Vec<usize>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let list = match &value {
        serde_json::Value::Array(items) => items.clone(),
        serde_json::Value::Object(map) => map
            .get("seeds")
            .and_then(|s| s.as_array())
            .context("object has no \"seeds\" array")?
            .clone(),
        _ => bail!("expected a JSON array or an object with a \"seeds\" field"),
    };
    list.iter()
        .map(|v| v.as_u64().map(|u| u as usize).context("seed ids must be non-negative integers"))
        .collect()
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let report = bound::probe_cost_bound(args.n, args.k, args.epsilon, args.delta, args.p)?;
    let text = match args.format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        OutputFormat::Csv => format!(
            "schema,n,k,epsilon,delta,p,n_rho,copies,tau,per_component,expected_total,high_probability\n\
             {},{},{},{},{},{},{},{},{},{},{},{}\n",
            experiment::CSV_SCHEMA,
            args.n,
            args.k,
            args.epsilon,
            args.delta,
            args.p,
            report.n_rho,
            report.copies,
            report.tau,
            report.per_component,
            report.expected_total,
            report.high_probability,
        ),
    };
    write_or_print(args.out.as_deref(), &text)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(out) = args.out {
        config.run.out = Some(out);
    }
    if let Some(seed) = args.seed {
        config.run.rng_seed = seed;
    }
    if let Some(reps) = args.reps {
        config.run.repetitions = reps;
    }
    if let Some(eval_sims) = args.eval_sims {
        config.run.eval_sims = eval_sims;
    }

    let outcome = run_experiment(&config)?;
    let summary_text = format!("{}\n", serde_json::to_string_pretty(&outcome.summary)?);

    if let Some(stem) = &config.run.out {
        let csv_path = stem.with_extension("csv");
        fs::write(&csv_path, experiment::csv_string(&outcome.rows))
            .with_context(|| format!("writing {}", csv_path.display()))?;
        let json_path = stem.with_extension("json");
        fs::write(&json_path, &summary_text)
            .with_context(|| format!("writing {}", json_path.display()))?;
    }
    match args.format {
        OutputFormat::Json => print!("{summary_text}"),
        OutputFormat::Csv => print!("{}", experiment::csv_string(&outcome.rows)),
    }
    Ok(())
}
