//! Acceptance gate for the benchmark: each test checks one advertised
//! guarantee end to end and prints a single pass/fail line. Every run is
//! driven by fixed stream keys, so a green suite stays green.

use std::time::Instant;

use queryim::baselines::greedy_full;
use queryim::cascade::{influence_mc, simulate_lt, ExactInfluence, LtMode};
use queryim::graph::{
    gen_clique_circle, gen_clique_plus_isolated, gen_erdos_renyi, gen_star,
};
use queryim::seed::{probe_and_seed, seed_from_sketch, sketch_coverage_value};
use queryim::sketch::{derive_probe_params, probe};
use queryim::spread::{lt_spread_seed, spread_seed};
use queryim::{
    Graph, LtOracle, Oracle, ProbeParams, RngStream, Sketch, WeightedLTGraph,
};
use queryim_cli::bound::probe_cost_bound;
use queryim_cli::config::ExperimentConfig;
use queryim_cli::experiment::{run_experiment, PointSummary};
use queryim_cli::profit::{profit, ProfitParams};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

const GUARANTEE: f64 = 1.0 - 1.0 / std::f64::consts::E;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("acceptance {}: {name} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

/// 200 graphs with at most 10 nodes and 16 edges, cascade probabilities
/// cycling through 0.2, 0.5, 0.9. Small enough for exact enumeration.
fn tiny_corpus() -> Vec<Graph> {
    let probs = [0.2, 0.5, 0.9];
    let mut graphs = Vec::with_capacity(200);
    let mut gen_seed = 0u64;
    while graphs.len() < 200 {
        gen_seed += 1;
        let n = 5 + (gen_seed as usize) % 6;
        let edge_prob = 0.15 + 0.05 * ((gen_seed % 5) as f64);
        let Ok(graph) = gen_erdos_renyi::<f64>(n, edge_prob, gen_seed) else { continue };
        if graph.edge_count() == 0 || graph.edge_count() > 16 {
            continue;
        }
        let p = probs[graphs.len() % 3];
        graphs.push(graph.with_uniform_prob(p).unwrap());
    }
    graphs
}

/// Brute-force optimum of the exact influence over all k-subsets.
fn exhaustive_optimum(exact: &ExactInfluence, n: usize, k: usize) -> f64 {
    fn rec(
        exact: &ExactInfluence,
        n: usize,
        k: usize,
        start: usize,
        set: &mut Vec<usize>,
        best: &mut f64,
    ) {
        if set.len() == k {
            *best = best.max(exact.value(set));
            return;
        }
        for v in start..n {
            set.push(v);
            rec(exact, n, k, v + 1, set, best);
            set.pop();
        }
    }
    let mut best = 0.0;
    rec(exact, n, k, 0, &mut Vec::with_capacity(k), &mut best);
    best
}

#[test]
fn monte_carlo_influence_matches_exact_enumeration() {
    let started = Instant::now();
    let graphs = tiny_corpus();
    let outcomes: Vec<bool> = graphs
        .par_iter()
        .enumerate()
        .map(|(gi, graph)| {
            let exact = ExactInfluence::new(graph).unwrap();
            let root = RngStream::new(1_000 + gi as u64);
            (0..2u64)
                .map(|si| {
                    let mut pick = root.fork(si);
                    let k = (1 + (gi + si as usize) % 3).min(graph.n());
                    let seeds = sample(&mut pick, graph.n(), k).into_vec();
                    let est = influence_mc(graph, &seeds, 200_000, &root.fork(10 + si)).unwrap();
                    let truth = exact.value(&seeds);
                    (est.mean - truth).abs() <= 4.0 * est.stderr
                })
                .collect::<Vec<bool>>()
        })
        .flatten()
        .collect();
    let hits = outcomes.iter().filter(|&&ok| ok).count();
    let total = outcomes.len();
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "monte carlo influence matches exact enumeration",
        hits * 100 >= total * 99 && elapsed < 300.0,
        format!("{hits}/{total} seed sets within 4 standard errors, {elapsed:.1}s"),
    );
}

#[test]
fn greedy_meets_the_guarantee_against_brute_force() {
    let graphs = tiny_corpus();
    let failures: Vec<String> = graphs
        .par_iter()
        .enumerate()
        .filter_map(|(gi, graph)| {
            let exact = ExactInfluence::new(graph).unwrap();
            let k = (1 + gi % 3).min(graph.n());
            let result =
                greedy_full(graph, k, 3_000, &RngStream::new(500 + gi as u64)).unwrap();
            let achieved = exact.value(&result.seeds);
            let optimum = exhaustive_optimum(&exact, graph.n(), k);
            (achieved < GUARANTEE * optimum - 1e-9)
                .then(|| format!("graph {gi}: {achieved:.4} < {:.4}", GUARANTEE * optimum))
        })
        .collect();
    verdict(
        "greedy meets the guarantee against brute force",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} instances at the (1 - 1/e) floor", graphs.len())
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn full_probing_sketch_values_track_simulated_influence() {
    let graph =
        gen_erdos_renyi::<f64>(50, 0.1, 7).unwrap().with_uniform_prob(0.3).unwrap();
    let n = graph.n();
    let oracle = Oracle::new(graph.clone());
    let params = ProbeParams::manual(1.0, 20_000, n).unwrap();
    let sketch = probe(&oracle, &params, &RngStream::new(21)).unwrap();

    let mut worst: f64 = 0.0;
    let mut within = 0;
    for i in 0..10u64 {
        let mut pick = RngStream::new(900 + i);
        let seeds = sample(&mut pick, n, 1 + (i as usize) % 4).into_vec();
        let sketch_value: f64 = sketch_coverage_value(&sketch, &seeds);
        let mc = influence_mc(&graph, &seeds, 100_000, &RngStream::new(600 + i)).unwrap();
        let diff = (sketch_value - mc.mean).abs();
        worst = worst.max(diff);
        if diff <= 0.05 * n as f64 {
            within += 1;
        }
    }
    verdict(
        "full probing sketch values track simulated influence",
        within == 10,
        format!("{within}/10 seed sets within {:.1} nodes, worst gap {worst:.3}", 0.05 * n as f64),
    );
}

/// Plain greedy on the sketch coverage function; ties break to the lowest id.
fn greedy_coverage_value(sketch: &Sketch, k: usize) -> f64 {
    let n = sketch.n();
    let mut set: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k.min(n) {
        let mut best = usize::MAX;
        let mut best_value = f64::NEG_INFINITY;
        for v in 0..n {
            if set.contains(&v) {
                continue;
            }
            let mut with = set.clone();
            with.push(v);
            let value: f64 = sketch_coverage_value(sketch, &with);
            if value > best_value {
                best = v;
                best_value = value;
            }
        }
        set.push(best);
    }
    sketch_coverage_value(sketch, &set)
}

#[test]
fn sketch_seeding_matches_greedy_and_keeps_its_guarantee() {
    let root = RngStream::new(777);
    let k = 2;
    let mut exhaustive_matches = 0;
    let mut sampled_ok = 0;
    let trials = 500u64;
    for trial in 0..trials {
        let mut pick = root.fork(trial);
        let n = 5 + pick.random_range(0..8usize);
        let edge_prob = 0.15 + 0.35 * pick.random::<f64>();
        let p = 0.2 + 0.6 * pick.random::<f64>();
        let graph = gen_erdos_renyi::<f64>(n, edge_prob, pick.random::<u64>())
            .unwrap()
            .with_uniform_prob(p)
            .unwrap();
        let oracle = Oracle::new(graph);
        let params = ProbeParams::manual(
            0.5 + 0.5 * pick.random::<f64>(),
            1 + pick.random_range(0..5usize),
            2 + pick.random_range(0..n),
        )
        .unwrap();
        let sketch = probe(&oracle, &params, &pick.fork(1)).unwrap();

        // A candidate pool covering every node degenerates to plain greedy.
        let exhaustive = seed_from_sketch::<f64>(&sketch, k, 1e-12, &pick.fork(2)).unwrap();
        if exhaustive.sketch_value == greedy_coverage_value(&sketch, k) {
            exhaustive_matches += 1;
        }

        let sampled = seed_from_sketch::<f64>(&sketch, k, 0.2, &pick.fork(3)).unwrap();
        let mut optimum: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                optimum = optimum.max(sketch_coverage_value(&sketch, &[a, b]));
            }
        }
        if sampled.sketch_value >= (GUARANTEE - 0.2) * optimum - 1e-9 {
            sampled_ok += 1;
        }
    }
    verdict(
        "sketch seeding matches greedy and keeps its guarantee",
        exhaustive_matches == trials && sampled_ok * 10 >= trials * 9,
        format!(
            "exhaustive candidates equal greedy {exhaustive_matches}/{trials}, \
             sampled candidates at the floor {sampled_ok}/{trials}"
        ),
    );
}

#[test]
fn spread_queries_find_the_star_center() {
    let started = Instant::now();
    let graph = gen_star::<f64>(100, false).unwrap().with_uniform_prob(0.3).unwrap();
    let oracle = Oracle::new(graph);
    let centered = (0..100u64)
        .into_par_iter()
        .filter(|&run| {
            let (result, _) = spread_seed(&oracle, 1, 5_000, &RngStream::new(3_000 + run)).unwrap();
            result.seeds[0] == 0
        })
        .count();
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "spread queries find the star center",
        centered >= 99 && elapsed < 60.0,
        format!("{centered}/100 runs chose the hub, {elapsed:.1}s"),
    );
}

#[test]
fn trace_frequencies_estimate_influence_without_bias() {
    let cases: Vec<Graph> = vec![
        Graph::new_undirected(4, vec![(0, 1), (1, 2), (2, 3)])
            .unwrap()
            .with_uniform_prob(0.6)
            .unwrap(),
        Graph::new_undirected(5, (0..5).map(|i| (i, (i + 1) % 5)).collect())
            .unwrap()
            .with_uniform_prob(0.4)
            .unwrap(),
        gen_star::<f64>(7, false).unwrap().with_uniform_prob(0.3).unwrap(),
        Graph::new_undirected(6, vec![(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5)])
            .unwrap()
            .with_edge_probs(vec![0.8, 0.2, 0.5, 0.7, 0.3, 0.9])
            .unwrap(),
    ];
    let rho = 10_000u64;
    let mut worst_sigmas: f64 = 0.0;
    let mut checked = 0;
    for (ci, graph) in cases.iter().enumerate() {
        let n = graph.n();
        let exact = ExactInfluence::new(graph).unwrap();
        let oracle = Oracle::new(graph.clone());
        let mut stream = RngStream::new(7_000 + ci as u64);
        let mut counts = vec![0u64; n];
        for _ in 0..rho {
            let u = stream.random_range(0..n);
            for &a in &oracle.spread_query(u, &mut stream).adopters {
                counts[a] += 1;
            }
        }
        // Seeding uniformly and reading who adopts estimates each node's own
        // influence, because live-edge reachability is symmetric.
        for u in 0..n {
            let truth = exact.value(&[u]);
            let estimate = n as f64 * counts[u] as f64 / rho as f64;
            let q = truth / n as f64;
            let sigma = n as f64 * (q * (1.0 - q) / rho as f64).sqrt();
            worst_sigmas = worst_sigmas.max((estimate - truth).abs() / sigma);
            checked += 1;
            if (estimate - truth).abs() > 4.0 * sigma {
                verdict(
                    "trace frequencies estimate influence without bias",
                    false,
                    format!("graph {ci} node {u}: {estimate:.3} vs {truth:.3}"),
                );
            }
        }
    }
    verdict(
        "trace frequencies estimate influence without bias",
        true,
        format!("{checked} node estimates, worst deviation {worst_sigmas:.2} sigma"),
    );
}

#[test]
fn hard_instances_starve_and_mislead_small_budgets() {
    // Ring of cliques: a tiny edge budget cannot tell ring cliques apart, so
    // probing plus seeding does no better than landing in a random clique.
    let (graph, info) = gen_clique_circle::<f64>(900, 0.3, 5).unwrap();
    let graph = graph.with_uniform_prob(1.0).unwrap();
    let exhaustive_reveals = 2 * graph.edge_count() as u64;
    let budget = exhaustive_reveals / 100;
    let (labels, sizes) = graph.components();
    let optimum = *sizes.iter().max().unwrap() as usize;
    let params = ProbeParams::manual(1e-4, 1, 1).unwrap();
    let spreads: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let oracle = Oracle::new(graph.clone());
            let (_, result) =
                probe_and_seed(&oracle, &params, 1, 0.2, &RngStream::new(4_000 + run)).unwrap();
            assert!(
                oracle.ledger().edge_reveals() <= budget,
                "probing overspent its {budget}-reveal budget"
            );
            sizes[labels[result.seeds[0]] as usize] as f64
        })
        .collect();
    let mean = spreads.iter().sum::<f64>() / 100.0;
    let var = spreads.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 99.0;
    let stderr = (var / 100.0).sqrt();
    let clique = info.clique_size as f64;
    let starved = mean <= 2.0 * clique + 4.0 * stderr && mean < optimum as f64 / 2.0;

    // One clique in a sea of isolated nodes: the chance that any of 50
    // uniform cascade observations touches the clique follows the miss rate
    // of uniform sampling.
    let needle = gen_clique_plus_isolated::<f64>(10_000, 100, 11)
        .unwrap()
        .with_uniform_prob(1.0)
        .unwrap();
    let member: Vec<bool> = (0..needle.n()).map(|v| needle.degree(v) > 0).collect();
    let oracle = Oracle::new(needle.clone());
    let trials = 400u64;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut stream = RngStream::new(5_000 + trial);
            (0..50).any(|_| {
                let u = stream.random_range(0..needle.n());
                oracle.spread_query(u, &mut stream).adopters.iter().any(|&a| member[a])
            })
        })
        .count();
    let rate = hits as f64 / trials as f64;
    let predicted = 1.0 - 0.99f64.powi(50);
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    let needle_found = (rate - predicted).abs() <= 4.0 * sigma;

    verdict(
        "hard instances starve and mislead small budgets",
        starved && needle_found,
        format!(
            "ring of cliques: mean spread {mean:.1} vs single clique {clique} and optimum \
             {optimum}; needle clique hit rate {rate:.3} vs predicted {predicted:.3}"
        ),
    );
}

#[test]
fn probing_bills_stay_under_the_predicted_ceiling() {
    let base = gen_erdos_renyi::<f64>(2_000, 0.005, 77).unwrap();
    let params = derive_probe_params::<f64>(2_000, 5, 0.5, 1.0).unwrap();
    let mut detail = Vec::new();
    let mut pass = true;
    for (pi, p) in [0.01, 0.1].into_iter().enumerate() {
        let graph = base.clone().with_uniform_prob(p).unwrap();
        let ceiling = probe_cost_bound(2_000, 5, 0.5, 1.0, p).unwrap().high_probability;
        let under = (0..100u64)
            .into_par_iter()
            .filter(|&run| {
                let oracle = Oracle::new(graph.clone());
                probe(&oracle, &params, &RngStream::new(8_000 + 200 * pi as u64 + run)).unwrap();
                (oracle.ledger().edge_reveals() as f64) <= ceiling
            })
            .count();
        pass &= under >= 95;
        detail.push(format!("p={p}: {under}/100 runs under {ceiling:.3e}"));
    }
    verdict("probing bills stay under the predicted ceiling", pass, detail.join("; "));
}

fn curve_shape(points: &[PointSummary]) -> (bool, f64, f64) {
    let monotone = points.windows(2).all(|w| {
        let noise = (w[0].spread_stderr.powi(2) + w[1].spread_stderr.powi(2)).sqrt();
        w[1].spread_mean >= w[0].spread_mean - 2.0 * noise
    });
    let first = points[1].spread_mean - points[0].spread_mean;
    let last = points[points.len() - 1].spread_mean - points[points.len() - 2].spread_mean;
    (monotone, first, last)
}

#[test]
fn query_budget_curves_flatten_after_early_gains() {
    use rand::seq::SliceRandom;
    use std::io::Write as _;

    // Relabel the attachment graph with a random permutation before writing
    // it out, so node ids carry no degree information and lowest-id tie
    // breaks cannot land on hubs for free.
    let pa = queryim::graph::gen_preferential_attachment::<f64>(2_000, 2, 42).unwrap();
    let mut relabel: Vec<usize> = (0..2_000).collect();
    relabel.shuffle(&mut RngStream::new(13));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("powerlaw.edges");
    {
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
        for v in 0..2_000 {
            writeln!(file, "{v}").unwrap();
        }
        for (u, v, _) in pa.edges() {
            writeln!(file, "{} {}", relabel[u], relabel[v]).unwrap();
        }
    }

    let probe_sweep = format!(
        r#"
        [graph]
        file = "{path}"

        [model]
        p = 0.2

        [algorithm]
        name = "probe-seed"
        k = 5
        rho = 0.05
        tau = 100
        copies = 1
        eps_prime = 0.1

        [sweep]
        parameter = "copies"
        values = [1, 2, 4, 8, 16, 32, 64]

        [run]
        repetitions = 100
        eval_sims = 500
        rng_seed = 1234
    "#,
        path = path.display()
    );
    let spread_sweep = format!(
        r#"
        [graph]
        file = "{path}"

        [model]
        p = 0.2

        [algorithm]
        name = "spread-seed"
        k = 5

        [sweep]
        parameter = "budget"
        values = [20, 40, 80, 160, 320, 640, 1280]

        [run]
        repetitions = 100
        eval_sims = 500
        rng_seed = 4321
    "#,
        path = path.display()
    );
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, toml) in [("copies", probe_sweep), ("budget", spread_sweep)] {
        let config = ExperimentConfig::from_toml(&toml).unwrap();
        let outcome = run_experiment(&config).unwrap();
        let means: Vec<String> =
            outcome.summary.points.iter().map(|p| format!("{:.1}", p.spread_mean)).collect();
        let (monotone, first, last) = curve_shape(&outcome.summary.points);
        pass &= monotone && first > 0.0 && last < 0.25 * first;
        detail.push(format!(
            "{name}: means [{}], first doubling +{first:.2}, last {last:+.2}",
            means.join(", ")
        ));
    }
    verdict("query budget curves flatten after early gains", pass, detail.join("; "));
}

#[test]
fn profit_formula_reproduces_the_stock_constants() {
    let stock = ProfitParams::default();
    let table: [(f64, usize, u64, f64); 5] = [
        (1_000.0, 4, 44, 16.0),
        (0.0, 0, 0, 0.0),
        (2_000.0, 5, 100, 50.0),
        (500.0, 10, 0, -50.0),
        (4_000.0, 10, 350, -50.0),
    ];
    let mut pass = true;
    for (spread, k, queries, expected) in table {
        let got = profit(spread, k, queries, &stock).unwrap();
        pass &= got == expected;
        let recomputed =
            stock.revenue * spread - stock.seed_cost * k as f64 - stock.query_cost * queries as f64;
        pass &= got == recomputed;
    }
    verdict(
        "profit formula reproduces the stock constants",
        pass,
        format!("{} rows exact at seed cost 10, query cost 1, revenue 0.1", table.len()),
    );
}

#[test]
fn threshold_and_triggering_cascades_agree() {
    let cases: Vec<(Graph, f64)> = vec![
        (Graph::new_undirected(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap(), 1.0),
        (Graph::new_undirected(5, (0..5).map(|i| (i, (i + 1) % 5)).collect()).unwrap(), 0.7),
        (gen_star::<f64>(6, false).unwrap(), 0.9),
        (gen_star::<f64>(6, true).unwrap(), 1.0),
        (gen_erdos_renyi::<f64>(7, 0.35, 3).unwrap(), 0.8),
        (Graph::new_directed(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap(), 0.6),
    ];
    let sims = 30_000u64;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (ci, (graph, scale)) in cases.iter().enumerate() {
        let n = graph.n();
        let lt = WeightedLTGraph::uniform_from(graph, *scale).unwrap();
        for (si, seeds) in [vec![0], vec![0, n / 2]].into_iter().enumerate() {
            let root = RngStream::new(9_000 + 10 * ci as u64 + si as u64);
            let mut adoption = [vec![0u64; n], vec![0u64; n]];
            for (mi, mode) in [LtMode::Thresholds, LtMode::Triggering].into_iter().enumerate() {
                for i in 0..sims {
                    let mut sub = root.fork(mi as u64).fork(i);
                    for &a in &simulate_lt(&lt, &seeds, &mut sub, mode).adopters {
                        adoption[mi][a] += 1;
                    }
                }
            }
            for v in 0..n {
                let p1 = adoption[0][v] as f64 / sims as f64;
                let p2 = adoption[1][v] as f64 / sims as f64;
                let pooled = (adoption[0][v] + adoption[1][v]) as f64 / (2 * sims) as f64;
                let sigma = (2.0 * pooled * (1.0 - pooled) / sims as f64).sqrt();
                worst = worst.max((p1 - p2).abs() / sigma.max(1e-12));
                pass &= (p1 - p2).abs() <= 4.0 * sigma + 1e-9;
            }
        }
    }

    // Reversed walks bill one weight draw per visited node, so no cascade
    // observation can cost more than n edge reveals.
    let walk_graph = gen_erdos_renyi::<f64>(40, 0.12, 9).unwrap();
    let oracle = LtOracle::new(WeightedLTGraph::uniform_from(&walk_graph, 0.85).unwrap());
    let n = walk_graph.n() as u64;
    let mut stream = RngStream::new(31);
    let mut prev = oracle.ledger();
    let mut cheap = true;
    for _ in 0..20_000 {
        let u = stream.random_range(0..walk_graph.n());
        oracle.reverse_cascade(u, &mut stream);
        let now = oracle.ledger();
        cheap &= now.kept_edges - prev.kept_edges <= n;
        cheap &= now.reverse_queries == prev.reverse_queries + 1;
        prev = now;
    }
    let seeded = LtOracle::new(WeightedLTGraph::uniform_from(&walk_graph, 0.85).unwrap());
    let _ = lt_spread_seed(&seeded, 3, 200, &RngStream::new(77)).unwrap();
    let ledger = seeded.ledger();
    cheap &= ledger.kept_edges <= n * ledger.reverse_queries;

    verdict(
        "threshold and triggering cascades agree",
        pass && cheap,
        format!(
            "worst adoption gap {worst:.2} sigma across {} graphs; every observed walk cost \
             at most n reveals",
            cases.len()
        ),
    );
}
