//! Limited probing and the component sketch it produces.
//!
//! `probe` draws a fixed set of initial nodes, then builds `T` independently
//! probed copies of the hidden graph through [`crate::oracle::ProbeSession`]s,
//! stopping any revealed component that grows past `tau`. Each copy is
//! reduced to its components annotated with initial-node counts; seeding
//! works entirely on that sketch, never on the graph.
//!
//! All parameter formulas use natural logarithms and round up, the
//! conservative direction for the guarantees they come from.

use std::collections::VecDeque;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Knobs of one probing pass: sampling fraction, copy count, component cap.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
pub struct ProbeParams<F: Scalar = f64> {
    /// Fraction of nodes drawn as initial nodes, in (0, 1]; materialized as
    /// ceil(n * rho).
    pub rho: F,
    /// Number of independently probed copies.
    pub copies: usize,
    /// A component stops expanding once its size exceeds this cap.
    pub tau: usize,
    /// Inputs the knobs were derived from, kept for provenance; `None` on
    /// hand-picked parameters.
    pub epsilon: Option<F>,
    pub delta: Option<F>,
    pub k: Option<usize>,
}

impl<F: Scalar> ProbeParams<F> {
    pub fn manual(rho: F, copies: usize, tau: usize) -> Result<Self> {
        if !(rho > F::zero() && rho <= F::one()) {
            return Err(Error::parameter(format!("rho {rho} outside (0, 1]")));
        }
        if copies == 0 || tau == 0 {
            return Err(Error::parameter("copy count and tau must be at least 1"));
        }
        Ok(ProbeParams { rho, copies, tau, epsilon: None, delta: None, k: None })
    }

    /// Number of initial nodes on an n-node graph: ceil(n * rho).
    pub fn n_rho(&self, n: usize) -> usize {
        let raw = (F::of_usize(n) * self.rho).ceil();
        (raw.to_usize().unwrap_or(n)).clamp(1, n)
    }
}

fn check_common<F: Scalar>(n: usize, k: usize) -> Result<(F, F)> {
    if n < 2 {
        return Err(Error::parameter(format!("need at least 2 nodes, got {n}")));
    }
    if k < 1 {
        return Err(Error::parameter("seed count k must be at least 1"));
    }
    Ok((F::of_usize(n), F::of_usize(k)))
}

fn check_eps_delta<F: Scalar>(epsilon: F, delta: F) -> Result<()> {
    if !(epsilon > F::zero() && epsilon <= F::one()) {
        return Err(Error::parameter(format!("epsilon {epsilon} outside (0, 1]")));
    }
    if !(delta > F::zero()) {
        return Err(Error::parameter(format!("delta {delta} must be positive")));
    }
    Ok(())
}

/// Sampling fraction rho = (2+eps)(k*delta*ln n + ln 2) / (2 eps^2 n),
/// clamped to at most 1 (probe everyone).
pub fn param_rho<F: Scalar>(n: usize, k: usize, epsilon: F, delta: F) -> Result<F> {
    let (nf, kf) = check_common::<F>(n, k)?;
    check_eps_delta(epsilon, delta)?;
    let two = F::of_usize(2);
    let raw = (two + epsilon) * (kf * delta * nf.ln() + two.ln())
        / (two * epsilon * epsilon * nf);
    Ok(raw.min(F::one()))
}

/// Copy count T = ceil(3 (delta + ln 2)(k + 1) ln n / eps^2).
pub fn param_t<F: Scalar>(n: usize, k: usize, epsilon: F, delta: F) -> Result<usize> {
    let (nf, kf) = check_common::<F>(n, k)?;
    check_eps_delta(epsilon, delta)?;
    let two = F::of_usize(2);
    let raw = F::of_usize(3) * (delta + two.ln()) * (kf + F::one()) * nf.ln()
        / (epsilon * epsilon);
    raw.ceil()
        .to_usize()
        .map(|t| t.max(1))
        .ok_or_else(|| Error::parameter(format!("copy count {raw} overflows")))
}

/// Component cap tau = ceil(n ln(1/eps) / (eps k)), capped at n. Values of
/// eps at or above 1 make the formula non-positive; the degenerate floor of
/// 1 is returned then.
pub fn param_tau<F: Scalar>(n: usize, k: usize, epsilon: F) -> Result<usize> {
    let (nf, kf) = check_common::<F>(n, k)?;
    if !(epsilon > F::zero()) {
        return Err(Error::parameter(format!("epsilon {epsilon} must be positive")));
    }
    if epsilon >= F::one() {
        return Ok(1);
    }
    let raw = nf * (F::one() / epsilon).ln() / (epsilon * kf);
    Ok(raw.ceil().to_usize().unwrap_or(n).clamp(1, n))
}

/// All three probing knobs from the analysis, with provenance recorded.
pub fn derive_probe_params<F: Scalar>(
    n: usize,
    k: usize,
    epsilon: F,
    delta: F,
) -> Result<ProbeParams<F>> {
    Ok(ProbeParams {
        rho: param_rho(n, k, epsilon, delta)?,
        copies: param_t(n, k, epsilon, delta)?,
        tau: param_tau(n, k, epsilon)?,
        epsilon: Some(epsilon),
        delta: Some(delta),
        k: Some(k),
    })
}

/// One revealed component: its members, how many initial nodes it holds,
/// and the value the seeding pass still credits it with.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Component {
    /// Sorted ascending.
    pub nodes: Vec<u32>,
    /// Number of initial nodes among the members; the component's worth.
    pub initial_count: u32,
    /// Either `initial_count` (not yet claimed by a chosen seed) or 0.
    pub current_value: u32,
}

/// Component partition revealed by one probing copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchCopy {
    components: Vec<Component>,
    kept_edges: u64,
    /// Node -> component index, u32::MAX for nodes this copy never revealed.
    comp_of: Vec<u32>,
}

impl SketchCopy {
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn kept_edges(&self) -> u64 {
        self.kept_edges
    }

    pub fn component_of(&self, v: usize) -> Option<usize> {
        match self.comp_of[v] {
            u32::MAX => None,
            idx => Some(idx as usize),
        }
    }
}

/// The product of one probing pass: the fixed initial nodes and `T`
/// independently revealed component partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    n: usize,
    initial_nodes: Vec<u32>,
    copies: Vec<SketchCopy>,
}

const SKETCH_FORMAT: &str = "queryim-sketch";
const SKETCH_VERSION: u32 = 1;

#[derive(serde::Serialize, serde::Deserialize)]
struct SketchFile {
    format: String,
    version: u32,
    n: usize,
    initial_nodes: Vec<u32>,
    copies: Vec<CopyFile>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CopyFile {
    kept_edges: u64,
    components: Vec<Component>,
}

impl Sketch {
    /// Assemble a sketch from raw parts, checking every structural
    /// invariant: sorted distinct members, disjoint components per copy,
    /// initial counts that match the initial-node set, and current values
    /// that are either intact or zeroed.
    pub fn from_parts(
        n: usize,
        mut initial_nodes: Vec<u32>,
        copies: Vec<(u64, Vec<Component>)>,
    ) -> Result<Self> {
        initial_nodes.sort_unstable();
        initial_nodes.dedup();
        if initial_nodes.is_empty() {
            return Err(Error::parameter("a sketch needs at least one initial node"));
        }
        if initial_nodes.last().map_or(false, |&v| v as usize >= n) {
            return Err(Error::parameter("initial node outside the node range"));
        }
        let is_initial = {
            let mut mask = vec![false; n];
            for &v in &initial_nodes {
                mask[v as usize] = true;
            }
            mask
        };
        let mut built = Vec::with_capacity(copies.len());
        for (kept_edges, components) in copies {
            let mut comp_of = vec![u32::MAX; n];
            for (idx, comp) in components.iter().enumerate() {
                if comp.nodes.is_empty() {
                    return Err(Error::parameter("empty component"));
                }
                if !comp.nodes.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::parameter("component members not sorted distinct"));
                }
                let mut initial = 0u32;
                for &v in &comp.nodes {
                    if v as usize >= n {
                        return Err(Error::parameter(format!("node {v} outside the node range")));
                    }
                    if comp_of[v as usize] != u32::MAX {
                        return Err(Error::parameter(format!(
                            "node {v} appears in two components of one copy"
                        )));
                    }
                    comp_of[v as usize] = idx as u32;
                    initial += u32::from(is_initial[v as usize]);
                }
                if initial == 0 {
                    return Err(Error::parameter("component holds no initial node"));
                }
                if comp.initial_count != initial {
                    return Err(Error::parameter(format!(
                        "component claims {} initial nodes, contains {initial}",
                        comp.initial_count
                    )));
                }
                if comp.current_value != 0 && comp.current_value != comp.initial_count {
                    return Err(Error::parameter(
                        "component value must be its initial count or zero",
                    ));
                }
            }
            built.push(SketchCopy { components, kept_edges, comp_of });
        }
        if built.is_empty() {
            return Err(Error::parameter("a sketch needs at least one copy"));
        }
        Ok(Sketch { n, initial_nodes, copies: built })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial_nodes(&self) -> &[u32] {
        &self.initial_nodes
    }

    pub fn copies(&self) -> &[SketchCopy] {
        &self.copies
    }

    /// Sum of kept-edge counts across copies.
    pub fn kept_edges(&self) -> u64 {
        self.copies.iter().map(|c| c.kept_edges).sum()
    }

    pub fn save_json<W: Write>(&self, out: W) -> Result<()> {
        let file = SketchFile {
            format: SKETCH_FORMAT.into(),
            version: SKETCH_VERSION,
            n: self.n,
            initial_nodes: self.initial_nodes.clone(),
            copies: self
                .copies
                .iter()
                .map(|c| CopyFile { kept_edges: c.kept_edges, components: c.components.clone() })
                .collect(),
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn load_json<R: Read>(input: R) -> Result<Self> {
        let file: SketchFile = serde_json::from_reader(input)?;
        if file.format != SKETCH_FORMAT {
            return Err(Error::parameter(format!("not a sketch artifact: {}", file.format)));
        }
        if file.version != SKETCH_VERSION {
            return Err(Error::parameter(format!(
                "sketch version {} unsupported (expected {SKETCH_VERSION})",
                file.version
            )));
        }
        Sketch::from_parts(
            file.n,
            file.initial_nodes,
            file.copies.into_iter().map(|c| (c.kept_edges, c.components)).collect(),
        )
    }
}

/// Probe the hidden graph: draw `ceil(n * rho)` initial nodes once, without
/// replacement, then build `copies` independent component partitions. Within
/// a copy, probing is breadth first from all initial nodes at once (FIFO,
/// ties by node id) and a node whose component already exceeds `tau` is
/// never probed, so overshoot is at most one reveal batch. Copies run in
/// parallel on forked substreams; the oracle bills every reveal.
pub fn probe<F: Scalar>(
    oracle: &Oracle<F>,
    params: &ProbeParams<F>,
    rng: &RngStream,
) -> Result<Sketch> {
    if oracle.is_directed() {
        return Err(Error::Model("probe sketching works on the undirected model".to_string()));
    }
    if !(params.rho > F::zero() && params.rho <= F::one()) || params.copies == 0 || params.tau == 0
    {
        return Err(Error::parameter("invalid probe parameters"));
    }
    let n = oracle.n();
    if n == 0 {
        return Err(Error::parameter("cannot probe an empty graph"));
    }
    let n_rho = params.n_rho(n);
    let mut initial: Vec<u32> = {
        let mut draw_rng = rng.fork(0);
        rand::seq::index::sample(&mut draw_rng, n, n_rho)
            .into_iter()
            .map(|v| v as u32)
            .collect()
    };
    initial.sort_unstable();
    let is_initial = {
        let mut mask = vec![false; n];
        for &v in &initial {
            mask[v as usize] = true;
        }
        mask
    };
    let copies: Result<Vec<SketchCopy>> = (0..params.copies)
        .into_par_iter()
        .map(|i| {
            let mut copy_rng = rng.fork(1 + i as u64);
            let mut session = oracle.session();
            let mut enqueued = vec![false; n];
            let mut queue = VecDeque::with_capacity(initial.len());
            for &v in &initial {
                enqueued[v as usize] = true;
                queue.push_back(v as usize);
            }
            while let Some(v) = queue.pop_front() {
                if session.component_size(v) > params.tau {
                    continue;
                }
                let report = session.probe(v, &mut copy_rng)?;
                for &u in &report.kept {
                    if !enqueued[u] {
                        enqueued[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            // Reduce the revealed subgraph to components, indexed by their
            // smallest member.
            let mut comp_of = vec![u32::MAX; n];
            let mut root_index = vec![u32::MAX; n];
            let mut components: Vec<Component> = Vec::new();
            for v in 0..n {
                if !enqueued[v] {
                    continue;
                }
                let root = session.component_root(v);
                let idx = if root_index[root] == u32::MAX {
                    root_index[root] = components.len() as u32;
                    components.push(Component {
                        nodes: Vec::new(),
                        initial_count: 0,
                        current_value: 0,
                    });
                    root_index[root]
                } else {
                    root_index[root]
                };
                comp_of[v] = idx;
                let comp = &mut components[idx as usize];
                comp.nodes.push(v as u32);
                comp.initial_count += u32::from(is_initial[v]);
            }
            for comp in &mut components {
                debug_assert!(comp.initial_count > 0);
                comp.current_value = comp.initial_count;
            }
            Ok(SketchCopy { components, kept_edges: session.ledger().kept_edges, comp_of })
        })
        .collect();
    Ok(Sketch { n, initial_nodes: initial, copies: copies? })
}
