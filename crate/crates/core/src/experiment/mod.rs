//! Seeded Monte-Carlo runner.
//!
//! Every `(I, Q, r)` cell draws one graph from a seed derived from the master
//! seed, then runs every configured solver on that same graph with its own
//! sub-seed. Work is spread over rayon but records come back in config order:
//! `I`, then `Q`, then realization, then solver.

mod output;
pub mod seed;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::{bp_allocate, greedy_allocate, BpParams, GreedyOrder};
use crate::csp::{build_csp, Allocation, CspError};
use crate::decimate::SolveStats;
use crate::metrics::{
    delta_hyperbolicity, interference_links, DeltaMode, MetricsError, DEFAULT_DELTA_SAMPLES, EXACT_DELTA_MAX_N,
};
use crate::net::{degree_stats, generate_erdos_renyi, generate_geometric, write_edge_list, ChannelParams, NetError, NetworkGraph};
use crate::sp::{sp_allocate, SpError, SpParams};

pub use output::{aggregate, emit_outputs, figures_script, records_csv, summary_csv, OutputFiles, SummaryRow};
pub use seed::{derive_seed, mix64};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no records to aggregate")]
    Empty,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Sp(#[from] SpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "er", alias = "ER")]
    Er,
    #[serde(rename = "geo", alias = "geometric", alias = "Geometric")]
    Geometric,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Geometric => "geo",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Model::Er => 1,
            Model::Geometric => 2,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(Model::Er),
            "geo" | "geometric" => Ok(Model::Geometric),
            _ => Err(ExperimentError::Config(format!("unknown model {s:?} (expected er or geo)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sp,
    Bp,
    Mnf,
    Pmnf,
    Random,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [SolverKind::Sp, SolverKind::Bp, SolverKind::Mnf, SolverKind::Pmnf, SolverKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Sp => "sp",
            SolverKind::Bp => "bp",
            SolverKind::Mnf => "mnf",
            SolverKind::Pmnf => "pmnf",
            SolverKind::Random => "random",
        }
    }

    fn tag(self) -> u64 {
        100 + self as u64
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| ExperimentError::Config(format!("unknown solver {s:?}")))
    }
}

/// Edge probability of the ER model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeProbRule {
    /// The same `p` for every station count.
    Fixed(f64),
    /// `p = c / I`, i.e. mean degree close to `c`.
    PerStation(f64),
}

impl Default for EdgeProbRule {
    fn default() -> Self {
        EdgeProbRule::PerStation(4.5)
    }
}

impl EdgeProbRule {
    pub fn edge_prob(self, stations: usize) -> f64 {
        match self {
            EdgeProbRule::Fixed(p) => p,
            EdgeProbRule::PerStation(c) => (c / stations as f64).min(1.0),
        }
    }
}

fn default_mu() -> f64 {
    ChannelParams::default().mu_dbm
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Station counts (ER) or Poisson means `lambda` (geometric).
    pub i_values: Vec<usize>,
    pub q_values: Vec<usize>,
    /// Neighbor threshold of the geometric model.
    #[serde(default = "default_mu")]
    pub mu_dbm: f64,
    #[serde(default)]
    pub edge_prob_rule: EdgeProbRule,
    pub z: usize,
    pub master_seed: u64,
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub sp_params: SpParams,
    #[serde(default)]
    pub compute_delta: bool,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse and validate.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg = Self::parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse without validating, for callers that override fields first.
    pub fn parse_json(text: &str) -> Result<Self, ExperimentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.z == 0 {
            return bad("z must be >= 1");
        }
        if self.i_values.is_empty() || self.q_values.is_empty() || self.solvers.is_empty() {
            return bad("i_values, q_values and solvers must be non-empty");
        }
        if self.i_values.contains(&0) || self.q_values.contains(&0) {
            return bad("station and pool counts must be >= 1");
        }
        if self.model == Model::Er {
            let p = match self.edge_prob_rule {
                EdgeProbRule::Fixed(p) | EdgeProbRule::PerStation(p) => p,
            };
            if !(p >= 0.0) || !p.is_finite() {
                return bad("edge probability rule must be finite and >= 0");
            }
            if matches!(self.edge_prob_rule, EdgeProbRule::Fixed(p) if p > 1.0) {
                return bad("fixed edge probability must be <= 1");
            }
        }
        if !self.mu_dbm.is_finite() {
            return bad("mu_dbm must be finite");
        }
        self.sp_params.validate()?;
        Ok(())
    }

    fn channel(&self) -> ChannelParams {
        ChannelParams { mu_dbm: self.mu_dbm, ..ChannelParams::default() }
    }
}

/// One solver run on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub model: Model,
    pub i_target: usize,
    pub i_actual: usize,
    pub q: usize,
    /// Threshold; only set for the geometric model.
    pub mu_dbm: Option<f64>,
    pub realization: usize,
    pub solver: SolverKind,
    pub interference_links: usize,
    pub zero_interference: bool,
    /// Violated clauses of the original encoding.
    pub cost: usize,
    pub avg_degree: f64,
    pub degree_std: f64,
    pub delta: Option<f64>,
    /// Message-passing sweeps (SP and BP).
    pub sp_iterations: usize,
    pub sp_restarts: usize,
    /// SP handed over to the greedy, or BP stopped on a forced shared pool.
    pub fallback_used: bool,
    pub runtime_ms: f64,
    /// Realization seed.
    pub seed: u64,
    pub graph_hash: String,
}

/// Hex SHA-256 of the graph's edge-list serialization.
pub fn graph_hash(g: &NetworkGraph) -> String {
    Sha256::digest(write_edge_list(g).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run one solver. Greedy solvers report empty stats.
pub fn run_solver(
    kind: SolverKind,
    g: &NetworkGraph,
    q: usize,
    sp_params: &SpParams,
    rng: &mut ChaCha8Rng,
) -> Result<(Allocation, SolveStats), ExperimentError> {
    let greedy = |order, rng: &mut ChaCha8Rng| (greedy_allocate(g, q, order, rng), SolveStats::default());
    Ok(match kind {
        SolverKind::Sp => sp_allocate(g, q, sp_params, rng)?,
        SolverKind::Bp => {
            let bp = BpParams { epsilon: sp_params.epsilon, max_sweeps: sp_params.t_sp_max, ..BpParams::default() };
            bp_allocate(g, q, &bp, rng)?
        }
        SolverKind::Mnf => greedy(GreedyOrder::StaticDegree, rng),
        SolverKind::Pmnf => greedy(GreedyOrder::ProgressiveDegree, rng),
        SolverKind::Random => greedy(GreedyOrder::Random, rng),
    })
}

/// Draw the graph of one realization.
pub fn realization_graph(cfg: &ExperimentConfig, i: usize, seed: u64) -> Result<NetworkGraph, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match cfg.model {
        Model::Er => generate_erdos_renyi(i, cfg.edge_prob_rule.edge_prob(i), &mut rng)?,
        Model::Geometric => generate_geometric(i as f64, &cfg.channel(), &mut rng)?.graph,
    })
}

pub fn realization_seed(cfg: &ExperimentConfig, i: usize, q: usize, r: usize) -> u64 {
    derive_seed(cfg.master_seed, &[cfg.model.tag(), i as u64, q as u64, r as u64])
}

/// Exact below the enumeration cutoff, sampled above it.
pub fn graph_delta(g: &NetworkGraph, seed: u64) -> Result<f64, MetricsError> {
    if g.n() <= EXACT_DELTA_MAX_N {
        delta_hyperbolicity::<ChaCha8Rng>(g, DeltaMode::Exact)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[seed::DELTA_TAG]));
        delta_hyperbolicity(g, DeltaMode::Sampled(DEFAULT_DELTA_SAMPLES, &mut rng))
    }
}

fn run_cell(cfg: &ExperimentConfig, i: usize, q: usize, r: usize) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let seed = realization_seed(cfg, i, q, r);
    let g = realization_graph(cfg, i, seed)?;
    let hash = graph_hash(&g);
    let (avg_degree, degree_std) = degree_stats(&g);
    let delta = if cfg.compute_delta { Some(graph_delta(&g, seed)?) } else { None };
    let fg = build_csp(&g, q)?;
    let mut out = Vec::with_capacity(cfg.solvers.len());
    for &kind in &cfg.solvers {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[kind.tag()]));
        let start = Instant::now();
        let (alloc, stats) = run_solver(kind, &g, q, &cfg.sp_params, &mut rng)?;
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        let links = interference_links(&g, &alloc)?;
        let cost = fg.cost(&alloc)?;
        let zero = fg.is_zero_interference(&alloc)?;
        if zero != (links == 0) {
            return Err(ExperimentError::Config(format!("checker disagrees with link count on {kind} r={r}")));
        }
        out.push(ExperimentRecord {
            model: cfg.model,
            i_target: i,
            i_actual: g.n(),
            q,
            mu_dbm: (cfg.model == Model::Geometric).then_some(cfg.mu_dbm),
            realization: r,
            solver: kind,
            interference_links: links,
            zero_interference: zero,
            cost,
            avg_degree,
            degree_std,
            delta,
            sp_iterations: stats.survey_sweeps,
            sp_restarts: stats.restarts,
            fallback_used: stats.fallback_used || stats.stopped_early,
            runtime_ms,
            seed,
            graph_hash: hash.clone(),
        });
    }
    Ok(out)
}

/// Run every cell, realization and solver of `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, usize)> = cfg
        .i_values
        .iter()
        .flat_map(|&i| cfg.q_values.iter().flat_map(move |&q| (0..cfg.z).map(move |r| (i, q, r))))
        .collect();
    let chunks: Vec<Vec<ExperimentRecord>> =
        jobs.par_iter().map(|&(i, q, r)| run_cell(cfg, i, q, r)).collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::from_json(r#"{"model":"er","i_values":[12],"q_values":[3],"z":2,"master_seed":9,"solvers":["mnf"]}"#)
            .unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = cfg();
        assert_eq!(c.edge_prob_rule, EdgeProbRule::PerStation(4.5));
        assert_eq!(c.sp_params, SpParams::default());
        assert!(!c.compute_delta);
        let mut bad = c.clone();
        bad.z = 0;
        assert!(bad.validate().is_err());
        bad = c.clone();
        bad.solvers.clear();
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"model":"er","i_values":[1],"q_values":[1],"z":1,"master_seed":0,"solvers":["sp"],"extra":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"model":"ER","i_values":[5],"q_values":[2],"z":1,"master_seed":0,"solvers":["sp","pmnf"],"edge_prob_rule":{"fixed":0.2}}"#).is_ok());
    }

    #[test]
    fn cardinality() {
        let recs = run_experiment(&cfg()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].realization, 0);
        assert_eq!(recs[1].realization, 1);
    }

    #[test]
    fn solvers_share_the_graph() {
        let mut c = cfg();
        c.solvers = SolverKind::ALL.to_vec();
        let recs = run_experiment(&c).unwrap();
        assert_eq!(recs.len(), 10);
        for pair in recs.chunks(5) {
            assert!(pair.iter().all(|r| r.graph_hash == pair[0].graph_hash && r.seed == pair[0].seed));
            let order: Vec<_> = pair.iter().map(|r| r.solver).collect();
            assert_eq!(order, SolverKind::ALL);
        }
        assert_ne!(recs[0].graph_hash, recs[5].graph_hash);
    }

    #[test]
    fn names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
        assert_eq!("geo".parse::<Model>().unwrap(), Model::Geometric);
        assert!("ba".parse::<Model>().is_err());
    }

    #[test]
    fn per_station_rule() {
        assert_eq!(EdgeProbRule::PerStation(4.5).edge_prob(100), 0.045);
        assert_eq!(EdgeProbRule::PerStation(4.5).edge_prob(2), 1.0);
        assert_eq!(EdgeProbRule::Fixed(0.3).edge_prob(100), 0.3);
    }
}
