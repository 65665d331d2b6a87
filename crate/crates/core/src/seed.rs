//! Seed selection on a component sketch.
//!
//! `sketch_coverage_value` is the estimator the sketch exists for: a seed
//! set's value is the initial-node mass of every component it touches,
//! averaged over copies and rescaled by the sampling fraction. Coverage
//! semantics make it monotone and submodular, so `seed_from_sketch` runs
//! stochastic greedy: each round scores a random candidate subset R against
//! the per-component values that are still unclaimed, takes the best node,
//! and zeroes every component that node sits in.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::oracle::{Oracle, QueryLedger};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{probe, ProbeParams, Sketch};

/// Chosen seeds plus everything needed to audit or replay the choice.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
pub struct SeedResult<F: Scalar = f64> {
    /// In selection order; always distinct.
    pub seeds: Vec<usize>,
    /// Coverage value of `seeds`, recomputed from scratch on the sketch.
    pub sketch_value: F,
    /// Stream key to replay the run.
    pub rng_seed: u64,
    /// Queries paid to earn this result (zero when seeding a saved sketch).
    pub query_cost: QueryLedger,
}

/// The sketch's spread estimate for `seed_set`: per copy, sum the
/// initial-node counts of the distinct components containing a seed, then
/// normalize by the copy count and the realized sampling fraction. Nodes no
/// copy revealed contribute nothing there.
pub fn sketch_coverage_value<F: Scalar>(sketch: &Sketch, seed_set: &[usize]) -> F {
    for &s in seed_set {
        assert!(s < sketch.n(), "seed {s} outside sketch universe");
    }
    let mut total = 0u64;
    for copy in sketch.copies() {
        let mut seen = vec![false; copy.components().len()];
        for &s in seed_set {
            if let Some(ci) = copy.component_of(s) {
                if !seen[ci] {
                    seen[ci] = true;
                    total += copy.components()[ci].initial_count as u64;
                }
            }
        }
    }
    let norm = F::of_usize(sketch.initial_nodes().len())
        * F::of_usize(sketch.copies().len());
    F::from_u64(total).unwrap() * F::of_usize(sketch.n()) / norm
}

/// Stochastic greedy over the sketch's component values.
///
/// Each of the `k` rounds draws, without replacement, a candidate set R of
/// size ceil((n/k) ln(1/eps_prime)) from the not-yet-chosen nodes (all
/// remaining nodes if fewer), scores every candidate by the current value of
/// its components summed over copies, and takes the maximum, lowest id on
/// ties. The winner's components are then zeroed in every copy, so later
/// rounds only credit new coverage. The input sketch is not mutated; its
/// stored `current_value` state is the starting point.
pub fn seed_from_sketch<F: Scalar>(
    sketch: &Sketch,
    k: usize,
    eps_prime: F,
    rng: &RngStream,
) -> Result<SeedResult<F>> {
    let n = sketch.n();
    if k < 1 || k > n {
        return Err(Error::parameter(format!("k = {k} outside 1..={n}")));
    }
    if !(eps_prime > F::zero() && eps_prime < F::one()) {
        return Err(Error::parameter(format!("eps_prime {eps_prime} outside (0, 1)")));
    }
    let r_base = (F::of_usize(n) / F::of_usize(k) * (F::one() / eps_prime).ln())
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    let mut values: Vec<Vec<u32>> = sketch
        .copies()
        .iter()
        .map(|c| c.components().iter().map(|comp| comp.current_value).collect())
        .collect();
    let mut stream = rng.fork(0);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut is_chosen = vec![false; n];
    for _ in 0..k {
        let candidates: Vec<usize> = (0..n).filter(|&v| !is_chosen[v]).collect();
        let r_size = r_base.min(candidates.len());
        let mut r_nodes: Vec<usize> = sample(&mut stream, candidates.len(), r_size)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        r_nodes.sort_unstable();
        let mut best = r_nodes[0];
        let mut best_score = 0u64;
        for (pos, &u) in r_nodes.iter().enumerate() {
            let score: u64 = sketch
                .copies()
                .iter()
                .zip(&values)
                .filter_map(|(copy, vals)| copy.component_of(u).map(|ci| vals[ci] as u64))
                .sum();
            if pos == 0 || score > best_score {
                best = u;
                best_score = score;
            }
        }
        chosen.push(best);
        is_chosen[best] = true;
        for (copy, vals) in sketch.copies().iter().zip(values.iter_mut()) {
            if let Some(ci) = copy.component_of(best) {
                vals[ci] = 0;
            }
        }
    }
    Ok(SeedResult {
        sketch_value: sketch_coverage_value(sketch, &chosen),
        seeds: chosen,
        rng_seed: rng.key(),
        query_cost: QueryLedger::default(),
    })
}

/// The full edge-query pipeline: probe the oracle into a sketch, seed from
/// it, and attach the probing bill to the result.
pub fn probe_and_seed<F: Scalar>(
    oracle: &Oracle<F>,
    params: &ProbeParams<F>,
    k: usize,
    eps_prime: F,
    rng: &RngStream,
) -> Result<(Sketch, SeedResult<F>)> {
    let sketch = probe(oracle, params, &rng.fork(0))?;
    let mut result = seed_from_sketch(&sketch, k, eps_prime, &rng.fork(1))?;
    result.query_cost = oracle.ledger();
    result.rng_seed = rng.key();
    Ok((sketch, result))
}
