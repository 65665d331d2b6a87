//! Graph representation, edge-list ingestion, and instance generators.
//!
//! Nodes are dense 0-based ids. Edges carry an activation probability; a
//! graph built with one uniform probability stores it once, per-edge values
//! are materialized only for heterogeneous inputs. The adjacency index is a
//! CSR layout: one incident list per node for undirected graphs, separate
//! outgoing and incoming lists for directed ones.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq)]
enum EdgeProbs<F> {
    Uniform(F),
    PerEdge(Vec<F>),
}

#[derive(Debug, Clone, Default)]
struct Adjacency {
    fwd_off: Vec<u32>,
    /// (neighbor, edge index); incident list for undirected, out-list for directed.
    fwd: Vec<(u32, u32)>,
    back_off: Vec<u32>,
    /// In-list for directed graphs; empty for undirected.
    back: Vec<(u32, u32)>,
}

fn csr(n: usize, pairs: &mut Vec<(u32, (u32, u32))>) -> (Vec<u32>, Vec<(u32, u32)>) {
    // Sorting by (node, neighbor, edge) fixes the iteration order everywhere
    // downstream: reveal batches, cascades, and tie-breaks are reproducible.
    pairs.sort_unstable();
    let mut off = vec![0u32; n + 1];
    for &(u, _) in pairs.iter() {
        off[u as usize + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let list = pairs.iter().map(|&(_, e)| e).collect();
    (off, list)
}

/// An immutable graph with per-edge activation probabilities.
#[derive(Debug, Clone)]
pub struct Graph<F: Scalar = f64> {
    n: usize,
    directed: bool,
    endpoints: Vec<(u32, u32)>,
    probs: EdgeProbs<F>,
    adj: Adjacency,
}

impl<F: Scalar> Graph<F> {
    /// Builds an undirected graph with every probability set to 1.
    pub fn new_undirected(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(n, false, edges)
    }

    /// Builds a directed graph with every probability set to 1.
    pub fn new_directed(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(n, true, edges)
    }

    fn build(n: usize, directed: bool, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::Capacity(format!("node count {n} exceeds u32 ids")));
        }
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut seen = HashSet::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::parameter(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::parameter(format!("self-loop at node {u}")));
            }
            let (u, v) = (u as u32, v as u32);
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if !seen.insert(key) {
                return Err(Error::parameter(format!("duplicate edge ({u}, {v})")));
            }
            endpoints.push((u, v));
        }
        let mut graph = Graph {
            n,
            directed,
            endpoints,
            probs: EdgeProbs::Uniform(F::one()),
            adj: Adjacency::default(),
        };
        graph.rebuild_adjacency();
        Ok(graph)
    }

    fn rebuild_adjacency(&mut self) {
        let mut fwd = Vec::with_capacity(self.endpoints.len() * if self.directed { 1 } else { 2 });
        let mut back = Vec::new();
        for (e, &(u, v)) in self.endpoints.iter().enumerate() {
            let e = e as u32;
            if self.directed {
                fwd.push((u, (v, e)));
                back.push((v, (u, e)));
            } else {
                fwd.push((u, (v, e)));
                fwd.push((v, (u, e)));
            }
        }
        let (fwd_off, fwd) = csr(self.n, &mut fwd);
        let (back_off, back) = if self.directed {
            csr(self.n, &mut back)
        } else {
            (Vec::new(), Vec::new())
        };
        self.adj = Adjacency { fwd_off, fwd, back_off, back };
    }

    /// Replaces every edge probability with the uniform value `p`.
    pub fn with_uniform_prob(mut self, p: F) -> Result<Self> {
        if !(p >= F::zero() && p <= F::one()) {
            return Err(Error::parameter(format!("probability {p} outside [0, 1]")));
        }
        self.probs = EdgeProbs::Uniform(p);
        Ok(self)
    }

    /// Replaces edge probabilities with per-edge values (collapsed back to
    /// uniform storage when all values are equal).
    pub fn with_edge_probs(mut self, probs: Vec<F>) -> Result<Self> {
        if probs.len() != self.endpoints.len() {
            return Err(Error::parameter(format!(
                "{} probabilities for {} edges",
                probs.len(),
                self.endpoints.len()
            )));
        }
        for &p in &probs {
            if !(p >= F::zero() && p <= F::one()) {
                return Err(Error::parameter(format!("probability {p} outside [0, 1]")));
            }
        }
        self.probs = match probs.first() {
            Some(&first) if probs.iter().all(|&p| p == first) => EdgeProbs::Uniform(first),
            Some(_) => EdgeProbs::PerEdge(probs),
            None => EdgeProbs::Uniform(F::one()),
        };
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let (u, v) = self.endpoints[edge];
        (u as usize, v as usize)
    }

    pub fn prob(&self, edge: usize) -> F {
        match &self.probs {
            EdgeProbs::Uniform(p) => *p,
            EdgeProbs::PerEdge(ps) => ps[edge],
        }
    }

    /// The shared probability if the graph is uniform.
    pub fn uniform_prob(&self) -> Option<F> {
        match &self.probs {
            EdgeProbs::Uniform(p) => Some(*p),
            EdgeProbs::PerEdge(_) => None,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        self.endpoints
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| (u as usize, v as usize, self.prob(e)))
    }

    /// Incident `(neighbor, edge)` pairs for undirected graphs, outgoing for
    /// directed ones; sorted by neighbor id.
    pub fn out_edges(&self, u: usize) -> &[(u32, u32)] {
        &self.adj.fwd[self.adj.fwd_off[u] as usize..self.adj.fwd_off[u + 1] as usize]
    }

    /// Incoming `(neighbor, edge)` pairs; identical to `out_edges` on
    /// undirected graphs.
    pub fn in_edges(&self, u: usize) -> &[(u32, u32)] {
        if self.directed {
            &self.adj.back[self.adj.back_off[u] as usize..self.adj.back_off[u + 1] as usize]
        } else {
            self.out_edges(u)
        }
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_edges(u).len()
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_edges(u).len()
    }

    /// Incident-edge count: plain degree for undirected graphs, in + out for
    /// directed ones.
    pub fn degree(&self, u: usize) -> usize {
        if self.directed {
            self.out_degree(u) + self.in_degree(u)
        } else {
            self.out_degree(u)
        }
    }

    /// Connected-component labels and sizes, ignoring edge direction.
    pub fn components(&self) -> (Vec<u32>, Vec<u32>) {
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.endpoints {
            uf.union(u, v);
        }
        let mut label = vec![u32::MAX; self.n];
        let mut sizes: Vec<u32> = Vec::new();
        let mut root_label = vec![u32::MAX; self.n];
        for v in 0..self.n as u32 {
            let root = uf.find(v) as usize;
            if root_label[root] == u32::MAX {
                root_label[root] = sizes.len() as u32;
                sizes.push(0);
            }
            label[v as usize] = root_label[root];
            sizes[root_label[root] as usize] += 1;
        }
        (label, sizes)
    }

    /// Writes the edge-list text format: `u v` per edge (plus the probability
    /// column unless it is uniformly 1) and one bare id per isolated node so
    /// reloading reproduces the node set exactly.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        let plain = self.uniform_prob() == Some(F::one());
        for (e, &(u, v)) in self.endpoints.iter().enumerate() {
            if plain {
                writeln!(out, "{u} {v}")?;
            } else {
                writeln!(out, "{u} {v} {}", self.prob(e))?;
            }
        }
        for v in 0..self.n {
            if self.degree(v) == 0 {
                writeln!(out, "{v}")?;
            }
        }
        Ok(())
    }
}

/// Loader output: the dense graph plus `original_ids[i]`, the external id of
/// internal node `i` (the identity map when the input was already dense).
#[derive(Debug, Clone)]
pub struct LoadedGraph<F: Scalar = f64> {
    pub graph: Graph<F>,
    pub original_ids: Vec<u64>,
}

/// Parses the edge-list text format: one `u v` or `u v prob` edge per line,
/// `#` comments, blank lines ignored, and a bare `u` line declaring an
/// otherwise-isolated node. Sparse external ids are remapped to dense 0-based
/// ids in ascending order; duplicate edge lines collapse to the first
/// occurrence. The result is always undirected.
pub fn load_edge_list<F: Scalar, R: BufRead>(reader: R) -> Result<LoadedGraph<F>> {
    let mut ids: BTreeMap<u64, u32> = BTreeMap::new();
    let mut edges: Vec<(u64, u64, Option<f64>)> = Vec::new();
    let mut any_prob = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let parse_id = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::parse(lineno, format!("invalid node id {s:?}")))
        };
        match fields.as_slice() {
            [u] => {
                let u = parse_id(u)?;
                ids.entry(u).or_insert(0);
            }
            [u, v] | [u, v, _] => {
                let (u, v) = (parse_id(u)?, parse_id(v)?);
                if u == v {
                    return Err(Error::parse(lineno, format!("self-loop at node {u}")));
                }
                let prob = if let [_, _, p] = fields.as_slice() {
                    let p: f64 = p.parse().map_err(|_| {
                        Error::parse(lineno, format!("invalid probability {p:?}"))
                    })?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::parameter(format!(
                            "probability {p} outside [0, 1] at line {lineno}"
                        )));
                    }
                    any_prob = true;
                    Some(p)
                } else {
                    None
                };
                ids.entry(u).or_insert(0);
                ids.entry(v).or_insert(0);
                edges.push((u, v, prob));
            }
            _ => {
                return Err(Error::parse(lineno, format!("expected 1-3 fields, got {}", fields.len())));
            }
        }
    }

    let original_ids: Vec<u64> = ids.keys().copied().collect();
    for (dense, (_, slot)) in ids.iter_mut().enumerate() {
        *slot = dense as u32;
    }

    let mut dedup: HashMap<(u32, u32), f64> = HashMap::new();
    let mut order: Vec<(u32, u32)> = Vec::new();
    for (u, v, prob) in edges {
        let (u, v) = (ids[&u], ids[&v]);
        let key = (u.min(v), u.max(v));
        if let std::collections::hash_map::Entry::Vacant(slot) = dedup.entry(key) {
            slot.insert(prob.unwrap_or(1.0));
            order.push(key);
        }
    }

    let n = original_ids.len();
    let edge_list: Vec<(usize, usize)> =
        order.iter().map(|&(u, v)| (u as usize, v as usize)).collect();
    let mut graph = Graph::new_undirected(n, edge_list)?;
    if any_prob {
        let probs = order
            .iter()
            .map(|key| {
                F::from_f64(dedup[key])
                    .ok_or_else(|| Error::parameter("probability not representable"))
            })
            .collect::<Result<Vec<F>>>()?;
        graph = graph.with_edge_probs(probs)?;
    }
    Ok(LoadedGraph { graph, original_ids })
}

/// Erdős–Rényi G(n, edge_prob): every unordered pair is an edge
/// independently. Deterministic given the seed.
pub fn gen_erdos_renyi<F: Scalar>(n: usize, edge_prob: F, seed: u64) -> Result<Graph<F>> {
    if n == 0 {
        return Err(Error::parameter("node count must be at least 1"));
    }
    if !(edge_prob >= F::zero() && edge_prob <= F::one()) {
        return Err(Error::parameter(format!("edge_prob {edge_prob} outside [0, 1]")));
    }
    let mut rng = RngStream::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if F::sample_unit(&mut rng) < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Graph::new_undirected(n, edges)
}

/// Ring-of-cliques metadata: which cliques were rewired together, in ring order.
#[derive(Debug, Clone)]
pub struct CliqueCircleInfo {
    pub clique_count: usize,
    pub clique_size: usize,
    /// Clique indices joined into the circle; clique `c` owns the id block
    /// `c*clique_size .. (c+1)*clique_size`.
    pub ring: Vec<usize>,
}

fn near_integer(x: f64, what: &str) -> Result<usize> {
    let rounded = x.round();
    if (x - rounded).abs() > 1e-9 * rounded.abs().max(1.0) || rounded < 0.0 {
        return Err(Error::parameter(format!("{what} = {x} is not a non-negative integer")));
    }
    Ok(rounded as usize)
}

/// The degree-preserving hard instance: `9/mu^2` disjoint cliques of size
/// `mu^2 n / 9`, with `3/mu` of them uniformly chosen and joined into a
/// circle by swapping one internal edge of each for a bridge to the next.
/// All three derived quantities must be integral.
pub fn gen_clique_circle<F: Scalar>(
    n: usize,
    mu: F,
    seed: u64,
) -> Result<(Graph<F>, CliqueCircleInfo)> {
    let mu = mu.to_f64().ok_or_else(|| Error::parameter("mu not representable"))?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::parameter(format!("mu = {mu} outside (0, 1]")));
    }
    let ring_len = near_integer(3.0 / mu, "3/mu")?;
    let clique_count = near_integer(9.0 / (mu * mu), "9/mu^2")?;
    let clique_size = near_integer(mu * mu * n as f64 / 9.0, "mu^2 n / 9")?;
    if clique_count * clique_size != n {
        return Err(Error::parameter(format!(
            "{clique_count} cliques of size {clique_size} do not cover {n} nodes"
        )));
    }
    if clique_size < 2 {
        return Err(Error::parameter(format!(
            "clique size {clique_size} has no internal edge to rewire"
        )));
    }
    debug_assert!(ring_len >= 3 && ring_len <= clique_count);

    let mut rng = RngStream::new(seed);
    let ring: Vec<usize> = rand::seq::index::sample(&mut rng, clique_count, ring_len).into_vec();

    // One ordered pair (v_i, u_i) per ring clique: (v_i, u_i) is removed and
    // u_i is bridged to v_{i+1}, so every node keeps its degree.
    let mut removed: HashSet<(u32, u32)> = HashSet::new();
    let mut swaps: Vec<(u32, u32)> = Vec::with_capacity(ring_len);
    for &c in &ring {
        let base = (c * clique_size) as u32;
        let v = base + rng.random_range(0..clique_size) as u32;
        let u = loop {
            let u = base + rng.random_range(0..clique_size) as u32;
            if u != v {
                break u;
            }
        };
        removed.insert((v.min(u), v.max(u)));
        swaps.push((v, u));
    }

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(clique_count * clique_size * (clique_size - 1) / 2);
    for c in 0..clique_count {
        let base = c * clique_size;
        for a in 0..clique_size {
            for b in a + 1..clique_size {
                let (x, y) = ((base + a) as u32, (base + b) as u32);
                if !removed.contains(&(x, y)) {
                    edges.push((x as usize, y as usize));
                }
            }
        }
    }
    for i in 0..ring_len {
        let (_, u) = swaps[i];
        let (v_next, _) = swaps[(i + 1) % ring_len];
        edges.push((u as usize, v_next as usize));
    }

    let graph = Graph::new_undirected(n, edges)?;
    Ok((graph, CliqueCircleInfo { clique_count, clique_size, ring }))
}

/// One clique on `clique_size` uniformly chosen ids; every other node isolated.
pub fn gen_clique_plus_isolated<F: Scalar>(
    n: usize,
    clique_size: usize,
    seed: u64,
) -> Result<Graph<F>> {
    if clique_size > n {
        return Err(Error::parameter(format!("clique size {clique_size} exceeds n = {n}")));
    }
    let mut rng = RngStream::new(seed);
    let mut members: Vec<usize> = rand::seq::index::sample(&mut rng, n, clique_size).into_vec();
    members.sort_unstable();
    let mut edges = Vec::with_capacity(clique_size.saturating_sub(1) * clique_size / 2);
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            edges.push((members[i], members[j]));
        }
    }
    Graph::new_undirected(n, edges)
}

/// A star with center 0; `directed_out` orients every edge away from the center.
pub fn gen_star<F: Scalar>(n: usize, directed_out: bool) -> Result<Graph<F>> {
    if n < 2 {
        return Err(Error::parameter(format!("star needs n >= 2, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|leaf| (0, leaf)).collect();
    if directed_out {
        Graph::new_directed(n, edges)
    } else {
        Graph::new_undirected(n, edges)
    }
}

/// Preferential attachment: starts from a complete graph on `attach + 1`
/// nodes, then each new node links to `attach` distinct existing nodes chosen
/// proportionally to degree. Produces the heavy-tailed degree profiles used
/// by the experiment corpus.
pub fn gen_preferential_attachment<F: Scalar>(
    n: usize,
    attach: usize,
    seed: u64,
) -> Result<Graph<F>> {
    if attach == 0 {
        return Err(Error::parameter("attach must be at least 1"));
    }
    if n < attach + 1 {
        return Err(Error::parameter(format!("n = {n} below seed clique size {}", attach + 1)));
    }
    let mut rng = RngStream::new(seed);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(attach * n);
    // Nodes appear once per unit of degree; uniform draws from this pool are
    // degree-proportional draws.
    let mut pool: Vec<u32> = Vec::with_capacity(2 * attach * n);
    for u in 0..attach + 1 {
        for v in u + 1..attach + 1 {
            edges.push((u, v));
            pool.push(u as u32);
            pool.push(v as u32);
        }
    }
    let mut targets: Vec<u32> = Vec::with_capacity(attach);
    for v in attach + 1..n {
        targets.clear();
        while targets.len() < attach {
            let t = pool[rng.random_range(0..pool.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t as usize, v));
            pool.push(t);
            pool.push(v as u32);
        }
    }
    Graph::new_undirected(n, edges)
}

/// A directed graph whose edge probabilities are linear-threshold influence
/// weights: for every node, the incoming weights sum to at most 1.
#[derive(Debug, Clone)]
pub struct WeightedLTGraph<F: Scalar = f64> {
    graph: Graph<F>,
}

impl<F: Scalar> WeightedLTGraph<F> {
    /// Wraps a directed graph after validating the per-node weight budget.
    pub fn new(graph: Graph<F>) -> Result<Self> {
        if !graph.is_directed() {
            return Err(Error::Model("linear-threshold weights require a directed graph".to_string()));
        }
        let slack = F::from_f64(1e-9).unwrap();
        for v in 0..graph.n() {
            let total: F = graph.in_edges(v).iter().map(|&(_, e)| graph.prob(e as usize)).sum();
            if total > F::one() + slack {
                return Err(Error::Model(format!(
                    "incoming weights at node {v} sum to {total} > 1"
                )));
            }
        }
        Ok(WeightedLTGraph { graph })
    }

    /// Derives weights from any graph: each edge becomes directed (both ways
    /// when the input is undirected) with weight `scale / in_degree(v)`.
    pub fn uniform_from(source: &Graph<F>, scale: F) -> Result<Self> {
        if !(scale > F::zero() && scale <= F::one()) {
            return Err(Error::parameter(format!("scale {scale} outside (0, 1]")));
        }
        let mut edges = Vec::new();
        for (u, v, _) in source.edges() {
            edges.push((u, v));
            if !source.is_directed() {
                edges.push((v, u));
            }
        }
        let graph = Graph::new_directed(source.n(), edges)?;
        let weights: Vec<F> = (0..graph.edge_count())
            .map(|e| {
                let (_, v) = graph.endpoints(e);
                scale / F::of_usize(graph.in_degree(v))
            })
            .collect();
        let graph = graph.with_edge_probs(weights)?;
        WeightedLTGraph::new(graph)
    }

    pub fn graph(&self) -> &Graph<F> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn weight(&self, edge: usize) -> F {
        self.graph.prob(edge)
    }
}
