//! Seeding by spread queries alone.
//!
//! `spread_seed` never sees an edge: each of its `k` rounds seeds `rho`
//! uniformly drawn nodes, watches who adopts, throws away any cascade that
//! touches an already-chosen seed, and takes the node that appeared most.
//! The count `X_u` scaled by `n / rho` is an unbiased estimate of `u`'s
//! marginal gain over the current seed set, which is what makes the greedy
//! step sound. `lt_spread_seed` is the same selection loop driven by
//! reversed linear-threshold cascades.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{LtOracle, Oracle};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::seed::SeedResult;

/// Per-round copy count rho = ceil(81 k ln(6nk/eps) / eps^3); the whole run
/// issues k * rho queries.
pub fn param_rho_spread<F: Scalar>(n: usize, k: usize, epsilon: F) -> Result<usize> {
    if n < 2 {
        return Err(Error::parameter(format!("need at least 2 nodes, got {n}")));
    }
    if k < 1 {
        return Err(Error::parameter("seed count k must be at least 1"));
    }
    if !(epsilon > F::zero() && epsilon <= F::one()) {
        return Err(Error::parameter(format!("epsilon {epsilon} outside (0, 1]")));
    }
    let (nf, kf) = (F::of_usize(n), F::of_usize(k));
    let raw = F::of_usize(81) * kf * (F::of_usize(6) * nf * kf / epsilon).ln()
        / (epsilon * epsilon * epsilon);
    raw.ceil()
        .to_usize()
        .map(|r| r.max(1))
        .ok_or_else(|| Error::parameter(format!("per-round count {raw} overflows")))
}

/// What one selection round saw: enough to audit a run without retaining
/// every adopter set.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SpreadRound {
    pub round: usize,
    pub chosen: usize,
    /// Appearance counts of the five strongest candidates, best first.
    pub top_counts: Vec<(usize, u64)>,
    /// Cascades discarded for touching an earlier seed.
    pub nulled: u64,
    /// True when every candidate count was zero and the seed was drawn
    /// uniformly instead.
    pub fallback: bool,
    /// Distinct nodes observed in any paid-for trace so far, nulled ones
    /// included; the last round's figure is the whole run's reveal count.
    pub nodes_seen: usize,
}

struct RoundTally {
    counts: Vec<u64>,
    nulled: u64,
}

/// One round of `rho` spread queries against the fixed chosen-set mask.
/// Queries fan out in parallel; counts are summed in query order. Every
/// trace member is marked in `seen`, nulled traces too: they were paid for
/// and observed even though they score nothing.
fn spread_round<F: Scalar>(
    oracle: &Oracle<F>,
    in_chosen: &[bool],
    rho: usize,
    rng: &mut RngStream,
    seen: &mut [bool],
) -> RoundTally {
    let n = oracle.n();
    let starts: Vec<usize> = (0..rho).map(|_| rng.random_range(0..n)).collect();
    let query_root = rng.fork(0);
    let traces: Vec<Vec<usize>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(j, u)| {
            let mut sub = query_root.fork(j as u64);
            oracle.spread_query(u, &mut sub).adopters
        })
        .collect();
    let mut counts = vec![0u64; n];
    let mut nulled = 0u64;
    for adopters in &traces {
        for &a in adopters {
            seen[a] = true;
        }
        if adopters.iter().any(|&a| in_chosen[a]) {
            nulled += 1;
            continue;
        }
        for &a in adopters {
            counts[a] += 1;
        }
    }
    RoundTally { counts, nulled }
}

fn top_candidates(counts: &[u64], in_chosen: &[bool]) -> Vec<(usize, u64)> {
    let mut ranked: Vec<(usize, u64)> = counts
        .iter()
        .enumerate()
        .filter(|&(v, &c)| !in_chosen[v] && c > 0)
        .map(|(v, &c)| (v, c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(5);
    ranked
}

fn select_by_counts<R: Rng>(
    counts: &[u64],
    in_chosen: &[bool],
    rng: &mut R,
) -> (usize, bool) {
    let mut best = None;
    for (v, &c) in counts.iter().enumerate() {
        if in_chosen[v] || c == 0 {
            continue;
        }
        if best.map_or(true, |(_, bc)| c > bc) {
            best = Some((v, c));
        }
    }
    match best {
        Some((v, _)) => (v, false),
        None => {
            let remaining: Vec<usize> =
                (0..counts.len()).filter(|&v| !in_chosen[v]).collect();
            (remaining[rng.random_range(0..remaining.len())], true)
        }
    }
}

/// Seed `k` nodes by frequency of appearance in paid-for cascades. See the
/// module docs for the loop; ties break to the lowest id, and a round in
/// which no candidate appeared at all falls back to a uniform draw among
/// the remaining nodes. The result's value field is the algorithm's own
/// spread estimate: the sum over rounds of (n / rho) times the winner's
/// count.
pub fn spread_seed<F: Scalar>(
    oracle: &Oracle<F>,
    k: usize,
    rho: usize,
    rng: &RngStream,
) -> Result<(SeedResult<F>, Vec<SpreadRound>)> {
    let n = oracle.n();
    if k < 1 || k > n {
        return Err(Error::parameter(format!("k = {k} outside 1..={n}")));
    }
    if rho < 1 {
        return Err(Error::parameter("rho must be at least 1"));
    }
    let mut in_chosen = vec![false; n];
    let mut seen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut rounds = Vec::with_capacity(k);
    let mut estimate = F::zero();
    for round in 0..k {
        let mut round_rng = rng.fork(round as u64);
        let tally = spread_round(oracle, &in_chosen, rho, &mut round_rng, &mut seen);
        let (winner, fallback) = select_by_counts(&tally.counts, &in_chosen, &mut round_rng);
        estimate = estimate
            + F::of_usize(n) * F::from_u64(tally.counts[winner]).unwrap() / F::of_usize(rho);
        rounds.push(SpreadRound {
            round,
            chosen: winner,
            top_counts: top_candidates(&tally.counts, &in_chosen),
            nulled: tally.nulled,
            fallback,
            nodes_seen: seen.iter().filter(|&&s| s).count(),
        });
        in_chosen[winner] = true;
        seeds.push(winner);
    }
    Ok((
        SeedResult {
            seeds,
            sketch_value: estimate,
            rng_seed: rng.key(),
            query_cost: oracle.ledger(),
        },
        rounds,
    ))
}

/// The reversed-cascade variant for the linear-threshold model: identical
/// selection loop, but each query walks triggering edges backward from a
/// uniformly drawn node, and a trace is discarded when it contains an
/// already-chosen seed. Every revealed triggering edge is billed, at most
/// n per trace (one draw per visited node).
pub fn lt_spread_seed<F: Scalar>(
    oracle: &LtOracle<F>,
    k: usize,
    rho: usize,
    rng: &RngStream,
) -> Result<(SeedResult<F>, Vec<SpreadRound>)> {
    let n = oracle.n();
    if k < 1 || k > n {
        return Err(Error::parameter(format!("k = {k} outside 1..={n}")));
    }
    if rho < 1 {
        return Err(Error::parameter("rho must be at least 1"));
    }
    let mut in_chosen = vec![false; n];
    let mut seen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut rounds = Vec::with_capacity(k);
    let mut estimate = F::zero();
    for round in 0..k {
        let mut round_rng = rng.fork(round as u64);
        let starts: Vec<usize> = (0..rho).map(|_| round_rng.random_range(0..n)).collect();
        let query_root = round_rng.fork(0);
        let traces: Vec<Vec<usize>> = starts
            .into_par_iter()
            .enumerate()
            .map(|(j, u)| {
                let mut sub = query_root.fork(j as u64);
                oracle.reverse_cascade(u, &mut sub)
            })
            .collect();
        let mut counts = vec![0u64; n];
        let mut nulled = 0u64;
        for trace in &traces {
            for &a in trace {
                seen[a] = true;
            }
            if trace.iter().any(|&a| in_chosen[a]) {
                nulled += 1;
                continue;
            }
            for &a in trace {
                counts[a] += 1;
            }
        }
        let (winner, fallback) = select_by_counts(&counts, &in_chosen, &mut round_rng);
        estimate =
            estimate + F::of_usize(n) * F::from_u64(counts[winner]).unwrap() / F::of_usize(rho);
        rounds.push(SpreadRound {
            round,
            chosen: winner,
            top_counts: top_candidates(&counts, &in_chosen),
            nulled,
            fallback,
            nodes_seen: seen.iter().filter(|&&s| s).count(),
        });
        in_chosen[winner] = true;
        seeds.push(winner);
    }
    Ok((
        SeedResult {
            seeds,
            sketch_value: estimate,
            rng_seed: rng.key(),
            query_cost: oracle.ledger(),
        },
        rounds,
    ))
}
