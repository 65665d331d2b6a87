//! Influence maximization on hidden networks under metered queries.
//!
//! The library covers both access models from the benchmark:
//!
//! * **Edge queries** — [`probe`](sketch::probe) surveys random nodes, which
//!   reveal incident edges with the cascade probability; the resulting
//!   [`Sketch`] of component-partitioned copies feeds the stochastic greedy
//!   seeder [`seed_from_sketch`](seed::seed_from_sketch).
//! * **Spread queries** — [`spread_seed`](spread::spread_seed) and its
//!   linear-threshold variant pick seeds from adopter counts of simulated
//!   cascades, never seeing an edge.
//!
//! Every interaction with the hidden graph goes through an [`Oracle`] that
//! meters costs into a [`QueryLedger`]. Full-information baselines, exact and
//! Monte Carlo influence evaluation, and the hard-instance generators round
//! out the benchmark surface.
//!
//! All numeric types are generic over the [`Scalar`] precision with `f64`
//! defaults; the bare names exported here are the f64 concrete types.

pub mod baselines;
pub mod cascade;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod seed;
pub mod sketch;
pub mod spread;
mod unionfind;

pub use cascade::{CascadeTrace, InfluenceEstimate, LtMode};
pub use error::{Error, Result};
pub use graph::{CliqueCircleInfo, LoadedGraph};
pub use oracle::{ProbeReport, QueryLedger};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use seed::SeedResult;
pub use sketch::Sketch;
pub use spread::SpreadRound;

/// Graph with f64 probabilities (the default precision).
pub type Graph = graph::Graph<f64>;
/// Linear-threshold weighted graph at default precision.
pub type WeightedLTGraph = graph::WeightedLTGraph<f64>;
/// Metered independent-cascade oracle at default precision.
pub type Oracle = oracle::Oracle<f64>;
/// Metered linear-threshold oracle at default precision.
pub type LtOracle = oracle::LtOracle<f64>;
/// Probing parameters at default precision.
pub type ProbeParams = sketch::ProbeParams<f64>;

/// Single-precision aliases for callers that opt out of f64.
pub type Graph32 = graph::Graph<f32>;
pub type WeightedLTGraph32 = graph::WeightedLTGraph<f32>;
pub type Oracle32 = oracle::Oracle<f32>;
