//! Metered access to a hidden graph.
//!
//! Algorithms that are supposed to pay for network information never see the
//! [`Graph`] itself; they hold an [`Oracle`] and spend queries. Every reported
//! edge, seeded diffusion, reversed cascade, and neighbor nomination is
//! counted in a [`QueryLedger`]. The cost unit for edge queries is one
//! reported edge, kept or discarded; adjacency positions whose reveal coin
//! fails cost nothing.

use std::sync::Mutex;

use crate::cascade::{simulate_ic, CascadeTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, WeightedLTGraph};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::unionfind::UnionFind;

/// Monotone counters of every costed query event.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize,
)]
pub struct QueryLedger {
    /// Edges revealed and retained (first report, or any directed reveal).
    pub kept_edges: u64,
    /// Second-chance reports the surveyor throws away (undirected only).
    pub discarded_edges: u64,
    /// Seeded forward diffusions observed.
    pub spread_queries: u64,
    /// Reversed cascades observed.
    pub reverse_queries: u64,
    /// Neighbor nominations (the friendship-paradox heuristic pays these).
    pub nomination_queries: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total edge reports: kept plus discarded.
    pub fn edge_reveals(&self) -> u64 {
        self.kept_edges + self.discarded_edges
    }

    /// Fieldwise sum; the merge model for concurrent sessions.
    pub fn merge(&mut self, other: &QueryLedger) {
        self.kept_edges += other.kept_edges;
        self.discarded_edges += other.discarded_edges;
        self.spread_queries += other.spread_queries;
        self.reverse_queries += other.reverse_queries;
        self.nomination_queries += other.nomination_queries;
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Independent-cascade oracle: owns the graph, meters every query.
///
/// Exposes the node universe and the diffusion model but never the edges;
/// callers learn structure only through [`ProbeSession::probe`],
/// [`Oracle::spread_query`], [`Oracle::reverse_cascade_ic`], and
/// [`Oracle::nominate`], all of which write to the ledger.
pub struct Oracle<F: Scalar = f64> {
    graph: Graph<F>,
    reveal_override: Option<F>,
    ledger: Mutex<QueryLedger>,
}

impl<F: Scalar> Oracle<F> {
    pub fn new(graph: Graph<F>) -> Self {
        Oracle { graph, reveal_override: None, ledger: Mutex::new(QueryLedger::new()) }
    }

    /// Experimental: decouple the probe reveal coin from the cascade
    /// probability, so probing reveals each edge with `p_reveal` while
    /// diffusion still follows the edge's own probability. No approximation
    /// guarantee is claimed in this regime.
    pub fn with_reveal_prob(mut self, p_reveal: F) -> Result<Self> {
        if !(p_reveal >= F::zero() && p_reveal <= F::one()) {
            return Err(Error::parameter(format!(
                "reveal probability {p_reveal} outside [0, 1]"
            )));
        }
        self.reveal_override = Some(p_reveal);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn is_directed(&self) -> bool {
        self.graph.is_directed()
    }

    /// Snapshot of all queries paid so far, across every session.
    pub fn ledger(&self) -> QueryLedger {
        *self.ledger.lock().unwrap()
    }

    fn charge(&self, delta: &QueryLedger) {
        self.ledger.lock().unwrap().merge(delta);
    }

    fn reveal_prob(&self, edge: usize) -> F {
        self.reveal_override.unwrap_or_else(|| self.graph.prob(edge))
    }

    /// Open an edge-probing session with its own probed set and ledger view.
    /// Sessions are single-owner; run several concurrently on forked streams
    /// and the shared ledger still sums exactly.
    pub fn session(&self) -> ProbeSession<'_, F> {
        ProbeSession {
            oracle: self,
            probed: vec![false; self.graph.n()],
            components: UnionFind::new(self.graph.n()),
            local: QueryLedger::new(),
        }
    }

    /// Run one cascade seeded at `u` and report who adopted. The realized
    /// edges stay hidden; only adopter identities come back.
    pub fn spread_query(&self, u: usize, rng: &mut RngStream) -> CascadeTrace {
        let trace = simulate_ic(&self.graph, &[u], rng);
        self.charge(&QueryLedger { spread_queries: 1, ..QueryLedger::new() });
        trace
    }

    /// Ask `v` to nominate a uniform neighbor (out-neighbor when directed);
    /// an isolated node nominates itself.
    pub fn nominate(&self, v: usize, rng: &mut RngStream) -> usize {
        assert!(v < self.graph.n(), "node {v} outside graph");
        let out = self.graph.out_edges(v);
        let pick = if out.is_empty() {
            v
        } else {
            out[rand::Rng::random_range(rng, 0..out.len())].0 as usize
        };
        self.charge(&QueryLedger { nomination_queries: 1, ..QueryLedger::new() });
        pick
    }

    /// Reversed cascade on a directed graph: walk incoming edges backward
    /// from `u`, each realized independently with its probability, and
    /// return every node with a realized path to `u` (sorted, including
    /// `u`). Realized edges are paid for as kept reveals.
    pub fn reverse_cascade_ic(&self, u: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        if !self.graph.is_directed() {
            return Err(Error::Model(
                "reversed independent-cascade queries need a directed graph".into(),
            ));
        }
        assert!(u < self.graph.n(), "node {u} outside graph");
        let mut visited = vec![false; self.graph.n()];
        visited[u] = true;
        let mut queue = std::collections::VecDeque::from([u]);
        let mut revealed = 0u64;
        while let Some(x) = queue.pop_front() {
            for &(w, e) in self.graph.in_edges(x) {
                let w = w as usize;
                if F::sample_unit(rng) < self.graph.prob(e as usize) {
                    revealed += 1;
                    if !visited[w] {
                        visited[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        self.charge(&QueryLedger {
            kept_edges: revealed,
            reverse_queries: 1,
            ..QueryLedger::new()
        });
        Ok(visited
            .iter()
            .enumerate()
            .filter_map(|(v, &seen)| seen.then_some(v))
            .collect())
    }
}

/// What one probe reported: neighbor identities, split into newly realized
/// edges and second-chance reports the surveyor discards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub node: usize,
    /// Other endpoints of edges realized by this probe.
    pub kept: Vec<usize>,
    /// Other endpoints of edges that already had their chance; reported
    /// again with a fresh coin, paid for, thrown away.
    pub discarded: Vec<usize>,
}

/// One probing pass over the hidden graph: tracks which nodes were probed,
/// the components revealed so far, and this session's own query bill.
pub struct ProbeSession<'a, F: Scalar = f64> {
    oracle: &'a Oracle<F>,
    probed: Vec<bool>,
    components: UnionFind,
    local: QueryLedger,
}

impl<F: Scalar> ProbeSession<'_, F> {
    pub fn is_probed(&self, v: usize) -> bool {
        self.probed[v]
    }

    /// Size of `v`'s component in the revealed subgraph (counts revealed but
    /// not yet probed nodes too; an untouched node counts as 1).
    pub fn component_size(&mut self, v: usize) -> usize {
        self.components.component_size(v as u32) as usize
    }

    /// Canonical representative of `v`'s revealed component; two nodes share
    /// a component exactly when their roots match.
    pub fn component_root(&mut self, v: usize) -> usize {
        self.components.find(v as u32) as usize
    }

    /// This session's own share of the bill.
    pub fn ledger(&self) -> QueryLedger {
        self.local
    }

    /// Probe `v`: every incident edge (incoming when directed) whose reveal
    /// coin succeeds is reported. On undirected graphs an edge gets one keep
    /// chance, at whichever endpoint is probed first; if the other endpoint
    /// is probed later the edge may be reported once more on a fresh coin,
    /// flagged discard. Directed reveals are always kept. Probing the same
    /// node twice in one session is an error.
    pub fn probe(&mut self, v: usize, rng: &mut RngStream) -> Result<ProbeReport> {
        assert!(v < self.oracle.graph.n(), "node {v} outside graph");
        if self.probed[v] {
            return Err(Error::Session(format!("node {v} already probed in this session")));
        }
        self.probed[v] = true;
        let directed = self.oracle.graph.is_directed();
        let incident = if directed {
            self.oracle.graph.in_edges(v)
        } else {
            self.oracle.graph.out_edges(v)
        };
        let mut report = ProbeReport { node: v, kept: Vec::new(), discarded: Vec::new() };
        for &(other, e) in incident {
            let other = other as usize;
            if F::sample_unit(rng) >= self.oracle.reveal_prob(e as usize) {
                continue;
            }
            if !directed && self.probed[other] {
                report.discarded.push(other);
            } else {
                report.kept.push(other);
                self.components.union(v as u32, other as u32);
            }
        }
        let delta = QueryLedger {
            kept_edges: report.kept.len() as u64,
            discarded_edges: report.discarded.len() as u64,
            ..QueryLedger::new()
        };
        self.local.merge(&delta);
        self.oracle.charge(&delta);
        Ok(report)
    }
}

/// Linear-threshold oracle for reversed-cascade queries: each visited node
/// reveals one realization of its triggering set (at most one in-neighbor).
pub struct LtOracle<F: Scalar = f64> {
    lt: WeightedLTGraph<F>,
    ledger: Mutex<QueryLedger>,
}

impl<F: Scalar> LtOracle<F> {
    pub fn new(lt: WeightedLTGraph<F>) -> Self {
        LtOracle { lt, ledger: Mutex::new(QueryLedger::new()) }
    }

    pub fn n(&self) -> usize {
        self.lt.n()
    }

    pub fn ledger(&self) -> QueryLedger {
        *self.ledger.lock().unwrap()
    }

    /// Walk backward from `u` through freshly drawn triggering edges,
    /// stopping on an empty triggering set or a revisit. Returns the walk
    /// in order, a simple path starting at `u` of length at most `n`; each
    /// revealed triggering edge is paid for as a kept reveal.
    pub fn reverse_cascade(&self, u: usize, rng: &mut RngStream) -> Vec<usize> {
        assert!(u < self.lt.n(), "node {u} outside graph");
        let graph = self.lt.graph();
        let mut on_path = vec![false; graph.n()];
        let mut trace = vec![u];
        on_path[u] = true;
        let mut revealed = 0u64;
        let mut current = u;
        loop {
            let x = F::sample_unit(rng);
            let mut cum = F::zero();
            let mut next = None;
            for &(w, e) in graph.in_edges(current) {
                cum = cum + graph.prob(e as usize);
                if x < cum {
                    next = Some(w as usize);
                    break;
                }
            }
            match next {
                None => break,
                Some(w) => {
                    revealed += 1;
                    if on_path[w] {
                        break;
                    }
                    on_path[w] = true;
                    trace.push(w);
                    current = w;
                }
            }
        }
        self.ledger.lock().unwrap().merge(&QueryLedger {
            kept_edges: revealed,
            reverse_queries: 1,
            ..QueryLedger::new()
        });
        trace
    }
}
