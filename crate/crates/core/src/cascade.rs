//! Diffusion simulation and influence evaluation.
//!
//! `simulate_ic` runs one independent-cascade realization with lazy live-edge
//! flips (one coin per undirected edge, shared by both directions).
//! `influence_mc` averages adopter counts over independent simulations;
//! `ExactInfluence` enumerates all live-edge realizations on instances with
//! at most 20 edges and is the ground truth the estimators are tested
//! against. `simulate_lt` covers the linear-threshold model in both its
//! thresholds and triggering-set formulations.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, WeightedLTGraph};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::unionfind::UnionFind;

/// Adopter set of one diffusion run.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CascadeTrace {
    /// Sorted ascending; always contains the seeds.
    pub adopters: Vec<usize>,
    pub seed_set: Vec<usize>,
    /// Edges whose coin came up live during this run (diagnostics only;
    /// `None` unless explicitly requested).
    pub realized_edges: Option<Vec<usize>>,
}

impl CascadeTrace {
    pub fn len(&self) -> usize {
        self.adopters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adopters.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.adopters.binary_search(&v).is_ok()
    }
}

/// Mean adopter count over independent simulations.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
pub struct InfluenceEstimate<F: Scalar = f64> {
    pub mean: F,
    /// Sample standard deviation divided by sqrt(n_sims).
    pub stderr: F,
    pub n_sims: usize,
}

fn sorted_dedup(seeds: &[usize]) -> Vec<usize> {
    let mut s = seeds.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

fn run_ic<F: Scalar>(
    graph: &Graph<F>,
    seeds: &[usize],
    rng: &mut RngStream,
    record_edges: bool,
) -> CascadeTrace {
    let seed_set = sorted_dedup(seeds);
    for &s in &seed_set {
        assert!(s < graph.n(), "seed {s} outside graph");
    }
    let mut adopted = vec![false; graph.n()];
    let mut flipped = vec![false; graph.edge_count()];
    let mut realized = record_edges.then(Vec::new);
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in &seed_set {
        adopted[s] = true;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &(v, e) in graph.out_edges(u) {
            let (v, e) = (v as usize, e as usize);
            if flipped[e] {
                continue;
            }
            flipped[e] = true;
            if F::sample_unit(rng) < graph.prob(e) {
                if let Some(edges) = realized.as_mut() {
                    edges.push(e);
                }
                if !adopted[v] {
                    adopted[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let adopters = adopted
        .iter()
        .enumerate()
        .filter_map(|(v, &a)| a.then_some(v))
        .collect();
    CascadeTrace { adopters, seed_set, realized_edges: realized }
}

/// One independent-cascade run: breadth-first over live edges, each edge
/// flipped at most once (out-edges only on directed graphs). An empty seed
/// set yields an empty trace.
pub fn simulate_ic<F: Scalar>(graph: &Graph<F>, seeds: &[usize], rng: &mut RngStream) -> CascadeTrace {
    run_ic(graph, seeds, rng, false)
}

/// `simulate_ic` with the realized live edges recorded for diagnostics.
pub fn simulate_ic_traced<F: Scalar>(
    graph: &Graph<F>,
    seeds: &[usize],
    rng: &mut RngStream,
) -> CascadeTrace {
    run_ic(graph, seeds, rng, true)
}

/// Monte Carlo influence estimate over `n_sims` independent runs, fanned out
/// in parallel on substreams `rng.fork(0..n_sims)`. Integer accumulation
/// keeps the result identical regardless of worker scheduling.
pub fn influence_mc<F: Scalar>(
    graph: &Graph<F>,
    seeds: &[usize],
    n_sims: usize,
    rng: &RngStream,
) -> Result<InfluenceEstimate<F>> {
    if n_sims == 0 {
        return Err(Error::parameter("n_sims must be at least 1"));
    }
    let counts: Vec<u64> = (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut sub = rng.fork(i as u64);
            simulate_ic(graph, seeds, &mut sub).len() as u64
        })
        .collect();
    let total: u64 = counts.iter().sum();
    let total_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let n = F::of_usize(n_sims);
    let mean = F::from_u64(total).unwrap() / n;
    let stderr = if n_sims > 1 {
        let sum_sq = F::from_u128(total_sq).unwrap();
        let var = (sum_sq - n * mean * mean) / (n - F::one());
        (var.max(F::zero()) / n).sqrt()
    } else {
        F::zero()
    };
    Ok(InfluenceEstimate { mean, stderr, n_sims })
}

/// Largest edge count `ExactInfluence` accepts (2^|E| enumeration).
pub const EXACT_EDGE_LIMIT: usize = 20;
/// Realization tables are cached up to this edge count; above it each
/// evaluation re-enumerates.
const EXACT_CACHE_LIMIT: usize = 16;

/// Exact expected spread by enumeration of all live-edge realizations.
///
/// Building the oracle once amortizes the enumeration across many seed sets
/// (greedy and brute-force search): undirected realizations are reduced to
/// component-label tables so one evaluation costs O(2^|E| · |S|).
pub struct ExactInfluence<F: Scalar = f64> {
    graph: Graph<F>,
    /// Dense index of nodes incident to at least one edge.
    compact: Vec<usize>,
    compact_of: Vec<Option<u32>>,
    /// Per mask: component label per compact node (undirected, cached mode).
    labels: Vec<u8>,
    /// Per mask: component size per label, stride `compact.len()`.
    sizes: Vec<u8>,
    /// Per mask probability (cached mode).
    mask_probs: Vec<F>,
}

impl<F: Scalar> ExactInfluence<F> {
    pub fn new(graph: &Graph<F>) -> Result<Self> {
        let m = graph.edge_count();
        if m > EXACT_EDGE_LIMIT {
            return Err(Error::Capacity(format!(
                "{m} edges exceed the exact enumeration limit of {EXACT_EDGE_LIMIT}"
            )));
        }
        let mut compact_of: Vec<Option<u32>> = vec![None; graph.n()];
        let mut compact = Vec::new();
        for (u, v, _) in graph.edges() {
            for node in [u, v] {
                if compact_of[node].is_none() {
                    compact_of[node] = Some(compact.len() as u32);
                    compact.push(node);
                }
            }
        }
        let mut oracle = ExactInfluence {
            graph: graph.clone(),
            compact,
            compact_of,
            labels: Vec::new(),
            sizes: Vec::new(),
            mask_probs: Vec::new(),
        };
        if !oracle.graph.is_directed() && m <= EXACT_CACHE_LIMIT {
            oracle.build_cache();
        }
        Ok(oracle)
    }

    fn mask_prob(&self, mask: u32) -> F {
        let mut p = F::one();
        for e in 0..self.graph.edge_count() {
            let pe = self.graph.prob(e);
            p = p * if mask >> e & 1 == 1 { pe } else { F::one() - pe };
        }
        p
    }

    fn build_cache(&mut self) {
        let m = self.graph.edge_count();
        let c = self.compact.len();
        let masks = 1usize << m;
        self.labels = vec![0; masks * c];
        self.sizes = vec![0; masks * c];
        self.mask_probs = Vec::with_capacity(masks);
        let ends: Vec<(u32, u32)> = self
            .graph
            .edges()
            .map(|(u, v, _)| (self.compact_of[u].unwrap(), self.compact_of[v].unwrap()))
            .collect();
        for mask in 0..masks {
            self.mask_probs.push(self.mask_prob(mask as u32));
            let mut uf = UnionFind::new(c);
            for (e, &(u, v)) in ends.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    uf.union(u, v);
                }
            }
            let base = mask * c;
            let mut next = 0u8;
            let mut root_label = vec![u8::MAX; c];
            for x in 0..c as u32 {
                let root = uf.find(x) as usize;
                if root_label[root] == u8::MAX {
                    root_label[root] = next;
                    next += 1;
                }
                let label = root_label[root];
                self.labels[base + x as usize] = label;
                self.sizes[base + label as usize] += 1;
            }
        }
    }

    /// Exact Γ(S): expected adopter count when seeding `S`.
    pub fn value(&self, seeds: &[usize]) -> F {
        let seeds = sorted_dedup(seeds);
        for &s in &seeds {
            assert!(s < self.graph.n(), "seed {s} outside graph");
        }
        let compact_seeds: Vec<u32> =
            seeds.iter().filter_map(|&s| self.compact_of[s]).collect();
        let isolated = F::of_usize(seeds.len() - compact_seeds.len());
        if compact_seeds.is_empty() {
            return isolated;
        }
        if !self.mask_probs.is_empty() {
            return isolated + self.cached_value(&compact_seeds);
        }
        isolated + self.enumerated_value(&compact_seeds)
    }

    fn cached_value(&self, compact_seeds: &[u32]) -> F {
        let c = self.compact.len();
        let mut total = F::zero();
        for mask in 0..self.mask_probs.len() {
            let base = mask * c;
            let mut seen: u64 = 0;
            let mut covered = 0u32;
            for &s in compact_seeds {
                let label = self.labels[base + s as usize];
                if seen >> label & 1 == 0 {
                    seen |= 1 << label;
                    covered += self.sizes[base + label as usize] as u32;
                }
            }
            total = total + self.mask_probs[mask] * F::from_u32(covered).unwrap();
        }
        total
    }

    fn enumerated_value(&self, compact_seeds: &[u32]) -> F {
        let m = self.graph.edge_count();
        let c = self.compact.len();
        debug_assert!(c <= 64);
        let ends: Vec<(u32, u32)> = self
            .graph
            .edges()
            .map(|(u, v, _)| (self.compact_of[u].unwrap(), self.compact_of[v].unwrap()))
            .collect();
        let seed_bits: u64 = compact_seeds.iter().fold(0, |acc, &s| acc | 1 << s);
        let mut total = F::zero();
        for mask in 0..1u32 << m {
            // Live-edge adjacency over compact nodes, then bitset reachability.
            let mut adj = [0u64; 64];
            for (e, &(u, v)) in ends.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    adj[u as usize] |= 1 << v;
                    if !self.graph.is_directed() {
                        adj[v as usize] |= 1 << u;
                    }
                }
            }
            let mut reached = seed_bits;
            let mut frontier = seed_bits;
            while frontier != 0 {
                let mut next = 0u64;
                let mut bits = frontier;
                while bits != 0 {
                    let u = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    next |= adj[u];
                }
                frontier = next & !reached;
                reached |= next;
            }
            total = total + self.mask_prob(mask) * F::from_u32(reached.count_ones()).unwrap();
        }
        total
    }
}

/// One-shot exact expected spread; build [`ExactInfluence`] directly when
/// evaluating many seed sets on the same graph.
pub fn influence_exact<F: Scalar>(graph: &Graph<F>, seeds: &[usize]) -> Result<F> {
    Ok(ExactInfluence::new(graph)?.value(seeds))
}

/// Which formulation of the linear-threshold draw to use; the two are
/// distributionally equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtMode {
    /// Per-node uniform thresholds; activate once incoming active weight
    /// crosses the threshold.
    Thresholds,
    /// Per-node triggering set: one in-neighbor with its weight as
    /// probability, or none; activation flows through triggering edges.
    Triggering,
}

/// One linear-threshold run. Both modes draw exactly one uniform variate per
/// node (in node order) before spreading, so they consume identical stream
/// prefixes.
pub fn simulate_lt<F: Scalar>(
    lt: &WeightedLTGraph<F>,
    seeds: &[usize],
    rng: &mut RngStream,
    mode: LtMode,
) -> CascadeTrace {
    let graph = lt.graph();
    let seed_set = sorted_dedup(seeds);
    for &s in &seed_set {
        assert!(s < graph.n(), "seed {s} outside graph");
    }
    let mut adopted = vec![false; graph.n()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in &seed_set {
        adopted[s] = true;
        queue.push_back(s);
    }
    match mode {
        LtMode::Thresholds => {
            let thresholds: Vec<F> = (0..graph.n()).map(|_| F::sample_unit(rng)).collect();
            let mut incoming = vec![F::zero(); graph.n()];
            while let Some(u) = queue.pop_front() {
                for &(v, e) in graph.out_edges(u) {
                    let v = v as usize;
                    if adopted[v] {
                        continue;
                    }
                    incoming[v] = incoming[v] + graph.prob(e as usize);
                    if incoming[v] >= thresholds[v] {
                        adopted[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        LtMode::Triggering => {
            let triggering: Vec<Option<u32>> = (0..graph.n())
                .map(|v| {
                    let x = F::sample_unit(rng);
                    let mut cum = F::zero();
                    for &(u, e) in graph.in_edges(v) {
                        cum = cum + graph.prob(e as usize);
                        if x < cum {
                            return Some(u);
                        }
                    }
                    None
                })
                .collect();
            while let Some(u) = queue.pop_front() {
                for &(v, _) in graph.out_edges(u) {
                    let v = v as usize;
                    if !adopted[v] && triggering[v] == Some(u as u32) {
                        adopted[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    let adopters = adopted
        .iter()
        .enumerate()
        .filter_map(|(v, &a)| a.then_some(v))
        .collect();
    CascadeTrace { adopters, seed_set, realized_edges: None }
}
