//! Benchmark harness around the `queryim` library: experiment configs, the
//! sweep runner with its CSV/JSON outputs, closed-form cost bounds, and the
//! campaign profit model. The `queryim` binary is a thin layer over these.

pub mod bound;
pub mod config;
pub mod experiment;
pub mod profit;
