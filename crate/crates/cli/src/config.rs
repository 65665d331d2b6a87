//! TOML experiment configuration and the strategy descriptor it resolves to.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use queryim::graph::{
    gen_clique_circle, gen_clique_plus_isolated, gen_erdos_renyi, gen_preferential_attachment,
    gen_star, load_edge_list,
};
use queryim::sketch::derive_probe_params;
use queryim::{Graph, ProbeParams};
use serde::Deserialize;

use crate::profit::ProfitParams;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphConfig,
    #[serde(default)]
    pub model: ModelConfig,
    pub algorithm: AlgorithmConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub run: RunConfig,
    /// When present, every row also gets a profit figure.
    pub profit: Option<ProfitParams>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        self.model.validate()?;
        self.algorithm.validate()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate(&self.algorithm)?;
        }
        self.run.validate()?;
        if let Some(profit) = &self.profit {
            profit.validate()?;
        }
        Ok(())
    }

    /// Builds the cascade graph: generator or file, with the model's uniform
    /// probability applied.
    pub fn build_graph(&self) -> Result<Graph> {
        let graph = self.graph.build()?;
        match self.model.p {
            Some(p) => Ok(graph.with_uniform_prob(p)?),
            None if self.model.kind == ModelKind::Lt => Ok(graph),
            None if self.graph.file.is_some() => Ok(graph),
            None => bail!("generated graphs need model.p (file graphs may carry probabilities)"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Edge-list file; exclusive with `generator`.
    pub file: Option<PathBuf>,
    /// One of: erdos-renyi, clique-circle, clique-isolated, star, pref-attach.
    pub generator: Option<String>,
    pub n: Option<usize>,
    /// erdos-renyi: independent edge probability.
    pub edge_prob: Option<f64>,
    /// clique-circle: community fraction, derives clique count and size.
    pub mu: Option<f64>,
    /// clique-isolated: size of the single clique.
    pub clique: Option<usize>,
    /// pref-attach: links per arriving node.
    pub attach: Option<usize>,
    /// star: orient edges away from the center.
    #[serde(default)]
    pub directed_out: bool,
    /// Generator stream; structural randomness only.
    #[serde(default = "default_gen_seed")]
    pub gen_seed: u64,
}

fn default_gen_seed() -> u64 {
    1
}

impl GraphConfig {
    fn validate(&self) -> Result<()> {
        match (&self.file, &self.generator) {
            (Some(_), Some(_)) | (None, None) => {
                bail!("set exactly one of graph.file and graph.generator")
            }
            _ => Ok(()),
        }
    }

    fn need_n(&self) -> Result<usize> {
        self.n.context("this generator needs graph.n")
    }

    pub fn build(&self) -> Result<Graph> {
        if let Some(path) = &self.file {
            let file = std::fs::File::open(path)
                .with_context(|| format!("opening graph {}", path.display()))?;
            let loaded = load_edge_list::<f64, _>(std::io::BufReader::new(file))?;
            return Ok(loaded.graph);
        }
        let kind = self.generator.as_deref().expect("validated");
        let graph = match kind {
            "erdos-renyi" => gen_erdos_renyi(
                self.need_n()?,
                self.edge_prob.context("erdos-renyi needs graph.edge_prob")?,
                self.gen_seed,
            )?,
            "clique-circle" => {
                let mu = self.mu.context("clique-circle needs graph.mu")?;
                gen_clique_circle(self.need_n()?, mu, self.gen_seed)?.0
            }
            "clique-isolated" => gen_clique_plus_isolated(
                self.need_n()?,
                self.clique.context("clique-isolated needs graph.clique")?,
                self.gen_seed,
            )?,
            "star" => gen_star(self.need_n()?, self.directed_out)?,
            "pref-attach" => gen_preferential_attachment(
                self.need_n()?,
                self.attach.context("pref-attach needs graph.attach")?,
                self.gen_seed,
            )?,
            other => bail!("unknown generator {other:?}"),
        };
        Ok(graph)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Ic,
    Lt,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub kind: ModelKind,
    /// Uniform cascade probability; overrides any file probabilities.
    pub p: Option<f64>,
    /// Linear-threshold weight scale: each in-edge of v weighs
    /// scale / in_degree(v). Defaults to 1.
    pub lt_scale: Option<f64>,
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                bail!("model.p = {p} outside [0, 1]");
            }
        }
        if let Some(s) = self.lt_scale {
            if !(s > 0.0 && s <= 1.0) {
                bail!("model.lt_scale = {s} outside (0, 1]");
            }
        }
        if self.kind == ModelKind::Ic && self.lt_scale.is_some() {
            bail!("model.lt_scale only applies to kind = \"lt\"");
        }
        Ok(())
    }

    pub fn lt_scale(&self) -> f64 {
        self.lt_scale.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// One of: probe-seed, spread-seed, lt-spread-seed, greedy, random,
    /// one-hop, degree.
    pub name: String,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// Candidate-sampling accuracy of the sketch seeder; defaults to
    /// epsilon / 7.
    pub eps_prime: Option<f64>,
    /// Probing knob overrides; any subset, the rest derived from epsilon
    /// and delta.
    pub rho: Option<f64>,
    pub copies: Option<usize>,
    pub tau: Option<usize>,
    /// Spread queries per selection round.
    pub rounds_rho: Option<usize>,
    /// Total spread-query budget, split evenly: max(1, budget / k) per round.
    pub budget: Option<u64>,
    /// Monte Carlo evaluations per candidate for the full-information greedy.
    pub sims: Option<usize>,
}

impl AlgorithmConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            bail!("algorithm.k must be at least 1");
        }
        const NAMES: [&str; 7] =
            ["probe-seed", "spread-seed", "lt-spread-seed", "greedy", "random", "one-hop", "degree"];
        if !NAMES.contains(&self.name.as_str()) {
            bail!("unknown algorithm {:?} (expected one of {NAMES:?})", self.name);
        }
        if self.rounds_rho.is_some() && self.budget.is_some() {
            bail!("set at most one of algorithm.rounds_rho and algorithm.budget");
        }
        Ok(())
    }

    /// Probing knobs: derived from (epsilon, delta) with any explicit
    /// overrides on top; fully manual when all three are given.
    pub fn probe_params(&self, n: usize) -> Result<ProbeParams> {
        if let (Some(rho), Some(copies), Some(tau)) = (self.rho, self.copies, self.tau) {
            return Ok(ProbeParams::manual(rho, copies, tau)?);
        }
        let epsilon = self.epsilon.context("probe-seed needs algorithm.epsilon (or all of rho, copies, tau)")?;
        let delta = self.delta.context("probe-seed needs algorithm.delta (or all of rho, copies, tau)")?;
        let mut params = derive_probe_params(n, self.k, epsilon, delta)?;
        if let Some(rho) = self.rho {
            params.rho = rho;
        }
        if let Some(copies) = self.copies {
            params.copies = copies;
        }
        if let Some(tau) = self.tau {
            params.tau = tau;
        }
        // Re-validate the overridden knobs; provenance stays on the result.
        ProbeParams::manual(params.rho, params.copies, params.tau)?;
        Ok(params)
    }

    pub fn eps_prime(&self) -> Result<f64> {
        if let Some(e) = self.eps_prime {
            return Ok(e);
        }
        let epsilon = self.epsilon.context("eps_prime defaults to epsilon / 7, so one of the two is needed")?;
        Ok(epsilon / 7.0)
    }

    /// Spread queries per round: explicit, or a split budget, or the
    /// closed-form count for epsilon.
    pub fn rounds_rho(&self, n: usize) -> Result<usize> {
        if let Some(r) = self.rounds_rho {
            return Ok(r);
        }
        if let Some(budget) = self.budget {
            return Ok(((budget / self.k as u64).max(1)) as usize);
        }
        let epsilon = self.epsilon.context("spread seeding needs rounds_rho, budget, or epsilon")?;
        Ok(queryim::spread::param_rho_spread(n, self.k, epsilon)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One of: copies, rounds-rho, budget, tau, k. A zero for copies,
    /// rounds-rho, or budget degenerates that point to random seeding.
    pub parameter: String,
    pub values: Vec<u64>,
}

impl SweepConfig {
    fn validate(&self, algorithm: &AlgorithmConfig) -> Result<()> {
        let allowed: &[(&str, &[&str])] = &[
            ("copies", &["probe-seed"]),
            ("tau", &["probe-seed"]),
            ("rounds-rho", &["spread-seed", "lt-spread-seed"]),
            ("budget", &["spread-seed", "lt-spread-seed"]),
            ("k", &[]),
        ];
        let Some((_, algos)) = allowed.iter().find(|(p, _)| *p == self.parameter) else {
            bail!("unknown sweep parameter {:?}", self.parameter);
        };
        if !algos.is_empty() && !algos.contains(&algorithm.name.as_str()) {
            bail!("sweep parameter {:?} does not apply to {:?}", self.parameter, algorithm.name);
        }
        if self.values.is_empty() {
            bail!("sweep.values is empty");
        }
        if self.parameter == "k" && self.values.iter().any(|&v| v == 0) {
            bail!("k = 0 is not a run");
        }
        if self.parameter == "tau" && self.values.iter().any(|&v| v == 0) {
            bail!("tau = 0 is not a run");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub repetitions: usize,
    pub eval_sims: usize,
    pub rng_seed: u64,
    /// Output stem: rows go to `<out>.csv`, the summary to `<out>.json`.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { repetitions: 50, eval_sims: 500, rng_seed: 0, out: None }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            bail!("run.repetitions must be at least 1");
        }
        if self.eval_sims < 1 {
            bail!("run.eval_sims must be at least 1");
        }
        Ok(())
    }
}

/// A fully resolved algorithm choice for one run.
#[derive(Debug, Clone)]
pub enum Strategy {
    ProbeSeed { params: ProbeParams, eps_prime: f64 },
    SpreadSeed { rounds_rho: usize },
    LtSpreadSeed { rounds_rho: usize },
    Greedy { sims: usize },
    Random,
    OneHop,
    Degree,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ProbeSeed { .. } => "probe-seed",
            Strategy::SpreadSeed { .. } => "spread-seed",
            Strategy::LtSpreadSeed { .. } => "lt-spread-seed",
            Strategy::Greedy { .. } => "greedy",
            Strategy::Random => "random",
            Strategy::OneHop => "one-hop",
            Strategy::Degree => "degree",
        }
    }

}

/// Resolves the configured algorithm at one sweep point. `parameter` is
/// "none" outside sweeps. Zero queries means no information: those points
/// run the random baseline instead.
pub fn strategy_at(
    config: &ExperimentConfig,
    parameter: &str,
    value: u64,
    n: usize,
) -> Result<(Strategy, usize)> {
    let mut algo = config.algorithm.clone();
    match parameter {
        "none" => {}
        "copies" => algo.copies = Some(value as usize),
        "tau" => algo.tau = Some(value as usize),
        "rounds-rho" => {
            algo.rounds_rho = Some(value as usize);
            algo.budget = None;
        }
        "budget" => {
            algo.budget = Some(value);
            algo.rounds_rho = None;
        }
        "k" => algo.k = value as usize,
        other => bail!("unknown sweep parameter {other:?}"),
    }
    let zeroed = matches!(parameter, "copies" | "rounds-rho" | "budget") && value == 0;
    if zeroed {
        return Ok((Strategy::Random, algo.k));
    }

    let require_lt = config.model.kind == ModelKind::Lt;
    let strategy = match algo.name.as_str() {
        "probe-seed" => {
            if require_lt {
                bail!("probe-seed runs on the independent-cascade model");
            }
            Strategy::ProbeSeed { params: algo.probe_params(n)?, eps_prime: algo.eps_prime()? }
        }
        "spread-seed" => {
            if require_lt {
                bail!("spread-seed runs on the independent-cascade model; use lt-spread-seed");
            }
            Strategy::SpreadSeed { rounds_rho: algo.rounds_rho(n)? }
        }
        "lt-spread-seed" => {
            if !require_lt {
                bail!("lt-spread-seed needs model.kind = \"lt\"");
            }
            Strategy::LtSpreadSeed { rounds_rho: algo.rounds_rho(n)? }
        }
        "greedy" => Strategy::Greedy { sims: algo.sims.unwrap_or(500) },
        "random" => Strategy::Random,
        "one-hop" => Strategy::OneHop,
        "degree" => Strategy::Degree,
        other => bail!("unknown algorithm {other:?}"),
    };
    Ok((strategy, algo.k))
}
