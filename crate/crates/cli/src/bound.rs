//! Closed-form predictions for the probing pipeline's edge-query bill.

use anyhow::{bail, Result};
use queryim::sketch::derive_probe_params;

/// The cost analysis of a probing run, evaluated on the same materialized
/// integer parameters the probing pass itself uses.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundReport {
    /// Number of initial nodes, ceil(n * rho).
    pub n_rho: usize,
    /// Sketch copies T.
    pub copies: usize,
    /// Component-size cap tau.
    pub tau: usize,
    /// Expected reveals charged while one component grows to the cap:
    /// p * tau * (tau - 1) / 2.
    pub per_component: f64,
    /// Expected ledger total across all initial nodes and copies.
    pub expected_total: f64,
    /// High-probability ceiling on the ledger total: the run stays under
    /// this except with probability about 3 * exp(-delta).
    pub high_probability: f64,
}

/// Evaluates the three bound quantities for probing an n-node graph with
/// uniform edge probability `p` at the derived parameters for (k, epsilon,
/// delta).
pub fn probe_cost_bound(
    n: usize,
    k: usize,
    epsilon: f64,
    delta: f64,
    p: f64,
) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&p) {
        bail!("edge probability {p} outside [0, 1]");
    }
    let params = derive_probe_params::<f64>(n, k, epsilon, delta)?;
    let n_rho = params.n_rho(n);
    let copies = params.copies;
    let tau = params.tau;

    let nf = n as f64;
    let tf = copies as f64;
    let tauf = tau as f64;
    let per_component = p * tauf * (tauf - 1.0) / 2.0;
    let expected_total = (n_rho as f64)
        * tf
        * (per_component + (delta * (tauf * nf.ln() + tf.ln()) * per_component).sqrt());
    let high_probability =
        2.0 * expected_total + (2.0 + std::f64::consts::SQRT_2) * tf * nf * (delta + tf.ln()).sqrt();

    Ok(BoundReport { n_rho, copies, tau, per_component, expected_total, high_probability })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(actual: f64, expected: f64) {
        let rel = ((actual - expected) / expected).abs();
        assert!(rel < 1e-12, "{actual} vs {expected} (rel {rel})");
    }

    #[test]
    fn reference_values_at_the_benchmark_settings() {
        // Independently computed with 40-digit arithmetic.
        let b = probe_cost_bound(1000, 5, 0.5, 1.0, 0.1).unwrap();
        assert_eq!((b.n_rho, b.copies, b.tau), (177, 843, 278));
        close(b.per_component, 3850.3000000000002);
        close(b.expected_total, 980_949_932.606_543_1);
        close(b.high_probability, 1_969_905_644.796_564_1);

        let b = probe_cost_bound(1000, 5, 0.5, 1.0, 0.01).unwrap();
        close(b.per_component, 385.03);
        close(b.expected_total, 185_979_216.092_893_44);
        close(b.high_probability, 379_964_211.769_264_76);

        let b = probe_cost_bound(2000, 5, 0.5, 1.0, 0.1).unwrap();
        assert_eq!((b.n_rho, b.copies, b.tau), (194, 927, 555));
        close(b.per_component, 15_373.500000000002);
        close(b.expected_total, 4_214_173_016.012_263_7);
        close(b.high_probability, 8_446_060_799.859_041);

        let b = probe_cost_bound(2000, 5, 0.5, 1.0, 0.01).unwrap();
        close(b.per_component, 1537.35);
        close(b.expected_total, 734_825_074.272_083_1);
        close(b.high_probability, 1_487_364_916.378_680_3);
    }

    #[test]
    fn zero_probability_collapses_the_expected_terms() {
        let b = probe_cost_bound(1000, 5, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(b.per_component, 0.0);
        assert_eq!(b.expected_total, 0.0);
        // Only the concentration slack remains.
        close(b.high_probability, 8_005_779.583_477_889_5);
    }

    #[test]
    fn unit_cap_means_no_growth_cost() {
        // epsilon = 1 degenerates tau to 1, so tau * (tau - 1) = 0 at any p.
        let b = probe_cost_bound(1000, 5, 1.0, 1.0, 0.9).unwrap();
        assert_eq!(b.tau, 1);
        assert_eq!(b.per_component, 0.0);
        assert_eq!(b.expected_total, 0.0);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(probe_cost_bound(1000, 5, 0.5, 1.0, 1.5).is_err());
        assert!(probe_cost_bound(1000, 5, 0.5, 1.0, -0.1).is_err());
    }
}
