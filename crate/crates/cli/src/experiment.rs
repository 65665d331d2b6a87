//! Config-driven experiment runner: one metered row per (sweep point,
//! repetition), a CSV table, and a JSON summary with confidence intervals.

use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use queryim::baselines::{greedy_full, one_hop, random_seeds, top_degree};
use queryim::cascade::{influence_mc, simulate_lt, LtMode};
use queryim::seed::probe_and_seed;
use queryim::spread::{lt_spread_seed, spread_seed};
use queryim::{Graph, LtOracle, Oracle, QueryLedger, RngStream, WeightedLTGraph};
use rayon::prelude::*;

use crate::config::{strategy_at, ExperimentConfig, ModelKind, Strategy};
use crate::profit::profit;

pub const CSV_SCHEMA: u32 = 1;
const CSV_COLUMNS: &str = "schema,sweep_param,sweep_value,rep,algorithm,n,k,rng_seed,seeds,\
internal_value,spread_mean,spread_stderr,kept_edges,discarded_edges,edge_reveals,spread_queries,\
reverse_queries,nomination_queries,total_queries,revealed_nodes,profit";

/// One run of one algorithm: everything a row or a replay needs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunRecord {
    pub sweep_param: String,
    pub sweep_value: u64,
    pub rep: usize,
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    /// Key of the stream this run consumed; rerunning with it replays the run.
    pub rng_seed: u64,
    pub seeds: Vec<usize>,
    /// The algorithm's own value estimate; 0 for strategies without one.
    pub internal_value: f64,
    pub spread_mean: Option<f64>,
    pub spread_stderr: Option<f64>,
    pub ledger: QueryLedger,
    pub total_queries: u64,
    /// Distinct node identities the algorithm observed through queries.
    pub revealed_nodes: usize,
    pub profit: Option<f64>,
    /// Milliseconds; the one column kept out of the CSV so reruns stay
    /// byte-identical.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PointSummary {
    pub sweep_param: String,
    pub sweep_value: u64,
    pub repetitions: usize,
    /// Mean over repetitions of the per-run evaluated spread.
    pub spread_mean: f64,
    /// Standard error of that mean across repetitions.
    pub spread_stderr: f64,
    /// spread_mean -/+ 1.96 standard errors.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_internal_value: f64,
    pub mean_total_queries: f64,
    pub mean_revealed_nodes: f64,
    pub mean_profit: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Summary {
    pub schema: u32,
    pub algorithm: String,
    pub model: String,
    pub n: usize,
    pub edges: usize,
    pub k: usize,
    pub repetitions: usize,
    pub eval_sims: usize,
    pub rng_seed: u64,
    pub points: Vec<PointSummary>,
}

#[derive(Debug)]
pub struct Outcome {
    pub rows: Vec<RunRecord>,
    pub summary: Summary,
}

/// Runs every (sweep point, repetition) pair. Repetitions fan out in
/// parallel on forked streams; rows come back ordered by (point, rep).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let graph = config.build_graph()?;
    let lt = match config.model.kind {
        ModelKind::Lt => Some(WeightedLTGraph::uniform_from(&graph, config.model.lt_scale())?),
        ModelKind::Ic => None,
    };
    let n = graph.n();

    let points: Vec<(String, u64)> = match &config.sweep {
        Some(sweep) => {
            sweep.values.iter().map(|&v| (sweep.parameter.clone(), v)).collect()
        }
        None => vec![("none".to_string(), 0)],
    };

    let root = RngStream::new(config.run.rng_seed);
    let mut rows = Vec::with_capacity(points.len() * config.run.repetitions);
    for (pi, (param, value)) in points.iter().enumerate() {
        let (strategy, k) = strategy_at(config, param, *value, n)?;
        let point_root = root.fork(pi as u64);
        let mut point_rows = (0..config.run.repetitions)
            .into_par_iter()
            .map(|rep| {
                let rep_rng = point_root.fork(rep as u64);
                run_single(&graph, lt.as_ref(), config, &strategy, k, &rep_rng).map(|mut record| {
                    record.sweep_param = param.clone();
                    record.sweep_value = *value;
                    record.rep = rep;
                    record
                })
            })
            .collect::<Result<Vec<RunRecord>>>()?;
        rows.append(&mut point_rows);
    }

    let summary = summarize(config, &graph, &points, &rows);
    Ok(Outcome { rows, summary })
}

/// One algorithm run plus its evaluation, on a private stream: fork 0 drives
/// the algorithm, fork 1 the evaluation simulations.
fn run_single(
    graph: &Graph,
    lt: Option<&WeightedLTGraph>,
    config: &ExperimentConfig,
    strategy: &Strategy,
    k: usize,
    rng: &RngStream,
) -> Result<RunRecord> {
    let started = Instant::now();
    let (result, revealed_nodes) = execute(graph, lt, strategy, k, &rng.fork(0))?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let (spread_mean, spread_stderr) =
        evaluate(graph, lt, &result.seeds, config.run.eval_sims, &rng.fork(1))?;

    let ledger = result.query_cost;
    let total_queries = ledger.edge_reveals()
        + ledger.spread_queries
        + ledger.reverse_queries
        + ledger.nomination_queries;
    let profit = config
        .profit
        .as_ref()
        .map(|params| profit(spread_mean, k, total_queries, params))
        .transpose()?;

    Ok(RunRecord {
        sweep_param: "none".to_string(),
        sweep_value: 0,
        rep: 0,
        algorithm: strategy.name().to_string(),
        n: graph.n(),
        k,
        rng_seed: rng.key(),
        seeds: result.seeds,
        internal_value: result.sketch_value,
        spread_mean: Some(spread_mean),
        spread_stderr: Some(spread_stderr),
        ledger,
        total_queries,
        revealed_nodes,
        profit,
        wall_ms,
    })
}

fn execute(
    graph: &Graph,
    lt: Option<&WeightedLTGraph>,
    strategy: &Strategy,
    k: usize,
    rng: &RngStream,
) -> Result<(queryim::SeedResult, usize)> {
    match strategy {
        Strategy::ProbeSeed { params, eps_prime } => {
            let oracle = Oracle::new(graph.clone());
            let (sketch, result) = probe_and_seed(&oracle, params, k, *eps_prime, rng)?;
            let mut seen = vec![false; graph.n()];
            for copy in sketch.copies() {
                for component in copy.components() {
                    for &v in component.nodes.iter() {
                        seen[v as usize] = true;
                    }
                }
            }
            let revealed = seen.iter().filter(|&&s| s).count();
            Ok((result, revealed))
        }
        Strategy::SpreadSeed { rounds_rho } => {
            let oracle = Oracle::new(graph.clone());
            let (result, rounds) = spread_seed(&oracle, k, *rounds_rho, rng)?;
            let revealed = rounds.last().map_or(0, |r| r.nodes_seen);
            Ok((result, revealed))
        }
        Strategy::LtSpreadSeed { rounds_rho } => {
            let lt = lt.context("lt-spread-seed needs the linear-threshold model")?;
            let oracle = LtOracle::new(lt.clone());
            let (result, rounds) = lt_spread_seed(&oracle, k, *rounds_rho, rng)?;
            let revealed = rounds.last().map_or(0, |r| r.nodes_seen);
            Ok((result, revealed))
        }
        Strategy::Greedy { sims } => Ok((greedy_full(graph, k, *sims, rng)?, 0)),
        Strategy::Random => Ok((random_seeds(graph.n(), k, rng)?, 0)),
        Strategy::OneHop => {
            let oracle = Oracle::new(graph.clone());
            let result = one_hop(&oracle, k, rng)?;
            let revealed = result.seeds.len();
            Ok((result, revealed))
        }
        Strategy::Degree => Ok((top_degree(graph, k)?, 0)),
    }
}

/// Expected adopters of a fixed seed set under the configured model.
fn evaluate(
    graph: &Graph,
    lt: Option<&WeightedLTGraph>,
    seeds: &[usize],
    sims: usize,
    rng: &RngStream,
) -> Result<(f64, f64)> {
    match lt {
        None => {
            let estimate = influence_mc(graph, seeds, sims, rng)?;
            Ok((estimate.mean, estimate.stderr))
        }
        Some(lt) => Ok(lt_influence_mc(lt, seeds, sims, rng)),
    }
}

/// Monte Carlo mean adopter count under linear thresholds. Integer totals
/// keep the result independent of scheduling, like the cascade evaluator.
fn lt_influence_mc(
    lt: &WeightedLTGraph,
    seeds: &[usize],
    sims: usize,
    rng: &RngStream,
) -> (f64, f64) {
    let counts: Vec<u64> = (0..sims)
        .into_par_iter()
        .map(|i| {
            let mut sub = rng.fork(i as u64);
            simulate_lt(lt, seeds, &mut sub, LtMode::Thresholds).len() as u64
        })
        .collect();
    let total: u64 = counts.iter().sum();
    let total_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let mean = total as f64 / sims as f64;
    let var = (total_sq as f64 / sims as f64 - mean * mean).max(0.0);
    let stderr = (var / sims as f64).sqrt();
    (mean, stderr)
}

fn summarize(
    config: &ExperimentConfig,
    graph: &Graph,
    points: &[(String, u64)],
    rows: &[RunRecord],
) -> Summary {
    let reps = config.run.repetitions;
    let points = points
        .iter()
        .enumerate()
        .map(|(pi, (param, value))| {
            let slice = &rows[pi * reps..(pi + 1) * reps];
            let spreads: Vec<f64> = slice.iter().map(|r| r.spread_mean.unwrap_or(0.0)).collect();
            let mean = spreads.iter().sum::<f64>() / reps as f64;
            let var = if reps > 1 {
                spreads.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)
            } else {
                0.0
            };
            let stderr = (var / reps as f64).sqrt();
            let mean_of = |f: &dyn Fn(&RunRecord) -> f64| {
                slice.iter().map(|r| f(r)).sum::<f64>() / reps as f64
            };
            let mean_profit = config
                .profit
                .is_some()
                .then(|| mean_of(&|r: &RunRecord| r.profit.unwrap_or(0.0)));
            PointSummary {
                sweep_param: param.clone(),
                sweep_value: *value,
                repetitions: reps,
                spread_mean: mean,
                spread_stderr: stderr,
                ci_low: mean - 1.96 * stderr,
                ci_high: mean + 1.96 * stderr,
                mean_internal_value: mean_of(&|r: &RunRecord| r.internal_value),
                mean_total_queries: mean_of(&|r: &RunRecord| r.total_queries as f64),
                mean_revealed_nodes: mean_of(&|r: &RunRecord| r.revealed_nodes as f64),
                mean_profit,
                wall_ms: slice.iter().map(|r| r.wall_ms).sum(),
            }
        })
        .collect();
    Summary {
        schema: CSV_SCHEMA,
        algorithm: config.algorithm.name.clone(),
        model: match config.model.kind {
            ModelKind::Ic => "ic".to_string(),
            ModelKind::Lt => "lt".to_string(),
        },
        n: graph.n(),
        edges: graph.edge_count(),
        k: config.algorithm.k,
        repetitions: reps,
        eval_sims: config.run.eval_sims,
        rng_seed: config.run.rng_seed,
        points,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The stable row format. Every value is either an integer counter or
/// derived from seeded streams, so a rerun writes identical bytes.
pub fn write_csv<W: Write>(rows: &[RunRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_COLUMNS}")?;
    for r in rows {
        let seeds = r.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            CSV_SCHEMA,
            r.sweep_param,
            r.sweep_value,
            r.rep,
            r.algorithm,
            r.n,
            r.k,
            r.rng_seed,
            seeds,
            r.internal_value,
            fmt_opt(r.spread_mean),
            fmt_opt(r.spread_stderr),
            r.ledger.kept_edges,
            r.ledger.discarded_edges,
            r.ledger.edge_reveals(),
            r.ledger.spread_queries,
            r.ledger.reverse_queries,
            r.ledger.nomination_queries,
            r.total_queries,
            r.revealed_nodes,
            fmt_opt(r.profit),
        )?;
    }
    Ok(())
}

pub fn csv_string(rows: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("write to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}
