//! Campaign profit: revenue per adopter against per-seed and per-query costs.

use anyhow::{bail, Result};

/// Price sheet for a seeding campaign.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProfitParams {
    /// Cost of placing one seed.
    pub seed_cost: f64,
    /// Cost of one query, any kind.
    pub query_cost: f64,
    /// Revenue per expected adopter.
    pub revenue: f64,
}

impl Default for ProfitParams {
    /// The benchmark's stock constants.
    fn default() -> Self {
        ProfitParams { seed_cost: 10.0, query_cost: 1.0, revenue: 0.1 }
    }
}

impl ProfitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("seed_cost", self.seed_cost), ("query_cost", self.query_cost), ("revenue", self.revenue)]
        {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("{name} = {v} must be finite and non-negative");
            }
        }
        Ok(())
    }
}

/// revenue * spread - seed_cost * k - query_cost * queries.
pub fn profit(spread: f64, k: usize, queries: u64, params: &ProfitParams) -> Result<f64> {
    params.validate()?;
    if !(spread >= 0.0 && spread.is_finite()) {
        bail!("spread {spread} must be finite and non-negative");
    }
    Ok(params.revenue * spread
        - params.seed_cost * k as f64
        - params.query_cost * queries as f64)
}
