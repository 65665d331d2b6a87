//! Comparison strategies: what seeding looks like with the whole graph on
//! the table, or with no information at all.
//!
//! `greedy_full` and `top_degree` read the graph directly and pay nothing;
//! they are the full-information references. `random_seeds` uses nothing
//! but the node count. `one_hop` sits in between: it only asks random
//! people to name a friend, metered as nomination queries.

use rand::Rng;
use rayon::prelude::*;

use crate::cascade::{influence_mc, ExactInfluence};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::{Oracle, QueryLedger};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::seed::SeedResult;

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::parameter(format!("k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Lazy greedy: marginals are upper bounds from earlier iterations
/// (submodularity), refreshed until the top entry is current. `eval` gets
/// the candidate set and a replay index for its estimator noise.
fn lazy_greedy<F: Scalar>(
    n: usize,
    k: usize,
    eval: impl Fn(&[usize], u64) -> F + Sync,
) -> (Vec<usize>, F) {
    let mut gains: Vec<F> = (0..n)
        .into_par_iter()
        .map(|u| eval(&[u], u as u64))
        .collect();
    let mut fresh_at = vec![0usize; n];
    let mut chosen = vec![false; n];
    let mut seeds: Vec<usize> = Vec::with_capacity(k);
    let mut current_value = F::zero();
    let mut refreshes = 0u64;
    for iteration in 0..k {
        loop {
            let mut top = None;
            for v in 0..n {
                if chosen[v] {
                    continue;
                }
                if top.map_or(true, |(_, g)| gains[v] > g) {
                    top = Some((v, gains[v]));
                }
            }
            let (v, gain) = top.expect("k <= n leaves a candidate");
            if fresh_at[v] == iteration {
                seeds.push(v);
                chosen[v] = true;
                current_value = current_value + gain;
                break;
            }
            let mut with_v = seeds.clone();
            with_v.push(v);
            refreshes += 1;
            gains[v] = eval(&with_v, n as u64 + refreshes) - current_value;
            fresh_at[v] = iteration;
        }
    }
    (seeds, current_value)
}

/// Full-information greedy with Monte Carlo marginal estimates (`n_sims`
/// simulations per evaluation), lazily re-evaluated; ties break to the
/// lowest id. Touches no oracle, costs no queries.
pub fn greedy_full<F: Scalar>(
    graph: &Graph<F>,
    k: usize,
    n_sims: usize,
    rng: &RngStream,
) -> Result<SeedResult<F>> {
    check_k(k, graph.n())?;
    if n_sims < 1 {
        return Err(Error::parameter("n_sims must be at least 1"));
    }
    let (seeds, value) = lazy_greedy(graph.n(), k, |set: &[usize], idx: u64| {
        influence_mc(graph, set, n_sims, &rng.fork(idx)).expect("n_sims checked").mean
    });
    Ok(SeedResult {
        seeds,
        sketch_value: value,
        rng_seed: rng.key(),
        query_cost: QueryLedger::default(),
    })
}

/// Greedy with exact expected-spread evaluation; only for instances within
/// the exact enumerator's edge limit.
pub fn greedy_exact<F: Scalar>(graph: &Graph<F>, k: usize) -> Result<SeedResult<F>> {
    check_k(k, graph.n())?;
    let exact = ExactInfluence::new(graph)?;
    let (seeds, value) = lazy_greedy(graph.n(), k, |set: &[usize], _| exact.value(set));
    Ok(SeedResult {
        seeds,
        sketch_value: value,
        rng_seed: 0,
        query_cost: QueryLedger::default(),
    })
}

/// `k` distinct uniform nodes, sorted; knows nothing, pays nothing.
pub fn random_seeds<F: Scalar>(n: usize, k: usize, rng: &RngStream) -> Result<SeedResult<F>> {
    check_k(k, n)?;
    let mut stream = rng.fork(0);
    let mut seeds: Vec<usize> = rand::seq::index::sample(&mut stream, n, k).into_vec();
    seeds.sort_unstable();
    Ok(SeedResult {
        seeds,
        sketch_value: F::zero(),
        rng_seed: rng.key(),
        query_cost: QueryLedger::default(),
    })
}

/// Friend-of-a-random-person targeting: draw a node, seed whoever it
/// nominates, repeat until `k` distinct seeds. Each draw is one nomination
/// query; duplicates are redrawn, and the run gives up after n * k
/// attempts.
pub fn one_hop<F: Scalar>(oracle: &Oracle<F>, k: usize, rng: &RngStream) -> Result<SeedResult<F>> {
    if oracle.is_directed() {
        return Err(Error::Model("one-hop targeting is defined on undirected graphs".to_string()));
    }
    let n = oracle.n();
    check_k(k, n)?;
    let mut stream = rng.fork(0);
    let budget = n.saturating_mul(k);
    let mut attempts = 0usize;
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    while seeds.len() < k {
        if attempts >= budget {
            return Err(Error::Exhausted(format!(
                "{attempts} nominations yielded only {} of {k} distinct seeds",
                seeds.len()
            )));
        }
        attempts += 1;
        let v = stream.random_range(0..n);
        let w = oracle.nominate(v, &mut stream);
        if !chosen[w] {
            chosen[w] = true;
            seeds.push(w);
        }
    }
    Ok(SeedResult {
        seeds,
        sketch_value: F::zero(),
        rng_seed: rng.key(),
        query_cost: oracle.ledger(),
    })
}

/// The `k` best-connected nodes (in-degree on directed graphs), ties to the
/// lowest id. Full information, zero queries, no randomness.
pub fn top_degree<F: Scalar>(graph: &Graph<F>, k: usize) -> Result<SeedResult<F>> {
    let n = graph.n();
    check_k(k, n)?;
    let degree = |v: usize| {
        if graph.is_directed() {
            graph.in_degree(v)
        } else {
            graph.degree(v)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degree(b).cmp(&degree(a)).then(a.cmp(&b)));
    order.truncate(k);
    Ok(SeedResult {
        seeds: order,
        sketch_value: F::zero(),
        rng_seed: 0,
        query_cost: QueryLedger::default(),
    })
}
