//! Experiment configuration: JSON schema, defaults, and validation.
//!
//! An empty JSON object is a complete configuration: the defaults describe
//! the 20-node spectrum-sensing network (50 bands, 100 grid frequencies,
//! 8 occupied bands at 0.7 mW, observation-noise variance 0.001) with all
//! five algorithms enabled at mu = 0.05, eta = 0.05, tau = 1. Band indices
//! in the configuration are 1-based; node indices in edge lists are 0-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{AlgorithmConfig, BaselineKind, PMode};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub n_nodes: usize,
    /// Link radius for the random geometric graph on the unit square.
    pub connect_radius: f64,
    /// Explicit undirected edge list ([k, l] pairs, 0-based); overrides the
    /// random generator when present.
    pub edges: Option<Vec<(usize, usize)>>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            n_nodes: 20,
            connect_radius: 0.45,
            edges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_basis: usize,
    pub n_freq: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub basis_amplitude: f64,
    /// Number of occupied bands; their positions are drawn from the seed
    /// unless `support_bands` pins them.
    pub support_size: usize,
    /// Explicit occupied bands, 1-based.
    pub support_bands: Option<Vec<usize>>,
    pub active_power_mw: f64,
    pub obs_noise_var: f64,
    pub rx_noise_power: f64,
    /// Uniform range for per-node squared channel gains; 1 for every node
    /// when absent (ideal channels).
    pub channel_gain_range: Option<(f64, f64)>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_basis: 50,
            n_freq: 100,
            f_min: 0.0,
            f_max: 1.0,
            basis_amplitude: 1.0,
            support_size: 8,
            support_bands: None,
            active_power_mw: 0.7,
            obs_noise_var: 0.001,
            rx_noise_power: 0.0,
            channel_gain_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StandardParams {
    pub mu: f64,
}

impl Default for StandardParams {
    fn default() -> Self {
        Self { mu: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleParams {
    pub mu: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { mu: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RzaParams {
    pub mu: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for RzaParams {
    fn default() -> Self {
        Self {
            mu: 0.05,
            rho: 3.5e-5,
            eps: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L0Params {
    pub mu: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for L0Params {
    fn default() -> Self {
        Self {
            mu: 0.05,
            rho: 3.5e-5,
            beta: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DamdcParams {
    pub mu: f64,
    pub eta: f64,
    pub tau: f64,
    pub p_mode: PMode,
    pub selector_diffusion: bool,
    pub project_combination: bool,
}

impl Default for DamdcParams {
    fn default() -> Self {
        Self {
            mu: 0.05,
            eta: 0.05,
            tau: 1.0,
            p_mode: PMode::SoftState,
            selector_diffusion: true,
            project_combination: true,
        }
    }
}

/// Which algorithms run and with which parameters. A missing entry enables
/// the algorithm with defaults; an explicit `null` disables it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmsConfig {
    pub standard: Option<StandardParams>,
    pub oracle: Option<OracleParams>,
    pub rza: Option<RzaParams>,
    pub l0: Option<L0Params>,
    pub damdc: Option<DamdcParams>,
}

impl Default for AlgorithmsConfig {
    fn default() -> Self {
        Self {
            standard: Some(StandardParams::default()),
            oracle: Some(OracleParams::default()),
            rza: Some(RzaParams::default()),
            l0: Some(L0Params::default()),
            damdc: Some(DamdcParams::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingConfig {
    /// Band whose occupancy changes, 1-based.
    pub band: usize,
    /// Iteration at which the band goes silent.
    pub change_iteration: usize,
    /// Transmit power of the band before the change (mW).
    pub power_mw: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            band: 16,
            change_iteration: 500,
            power_mw: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub scenario: ScenarioConfig,
    pub algorithms: AlgorithmsConfig,
    pub n_iterations: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    pub tracking: Option<TrackingConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: TopologyConfig::default(),
            scenario: ScenarioConfig::default(),
            algorithms: AlgorithmsConfig::default(),
            n_iterations: 1000,
            n_runs: 100,
            master_seed: 1,
            tracking: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_runs == 0 {
            return Err(invalid("n_runs", "must be at least 1"));
        }
        let t = &self.topology;
        if t.n_nodes == 0 {
            return Err(invalid("topology.n_nodes", "must be at least 1"));
        }
        if t.edges.is_none() && !(t.connect_radius > 0.0) {
            return Err(invalid("topology.connect_radius", "must be positive"));
        }
        let s = &self.scenario;
        if s.n_basis == 0 {
            return Err(invalid("scenario.n_basis", "must be at least 1"));
        }
        if s.n_freq == 0 {
            return Err(invalid("scenario.n_freq", "must be at least 1"));
        }
        if !(s.f_min < s.f_max) {
            return Err(invalid("scenario.f_min", "f_min must be below f_max"));
        }
        if s.support_size > s.n_basis {
            return Err(invalid(
                "scenario.support_size",
                format!("exceeds n_basis = {}", s.n_basis),
            ));
        }
        if let Some(bands) = &s.support_bands {
            if bands.len() != s.support_size {
                return Err(invalid(
                    "scenario.support_bands",
                    format!("has {} entries, support_size is {}", bands.len(), s.support_size),
                ));
            }
            let mut seen = vec![false; s.n_basis];
            for &b in bands {
                if b < 1 || b > s.n_basis {
                    return Err(invalid(
                        "scenario.support_bands",
                        format!("band {b} outside 1..={}", s.n_basis),
                    ));
                }
                if seen[b - 1] {
                    return Err(invalid("scenario.support_bands", format!("band {b} repeated")));
                }
                seen[b - 1] = true;
            }
        }
        if s.obs_noise_var < 0.0 {
            return Err(invalid("scenario.obs_noise_var", "must be nonnegative"));
        }
        if s.active_power_mw < 0.0 {
            return Err(invalid("scenario.active_power_mw", "must be nonnegative"));
        }
        if let Some((lo, hi)) = s.channel_gain_range {
            if !(0.0 <= lo && lo <= hi) {
                return Err(invalid(
                    "scenario.channel_gain_range",
                    "must satisfy 0 <= low <= high",
                ));
            }
        }
        for (field, mu) in [
            ("algorithms.standard.mu", self.algorithms.standard.as_ref().map(|p| p.mu)),
            ("algorithms.oracle.mu", self.algorithms.oracle.as_ref().map(|p| p.mu)),
            ("algorithms.rza.mu", self.algorithms.rza.as_ref().map(|p| p.mu)),
            ("algorithms.l0.mu", self.algorithms.l0.as_ref().map(|p| p.mu)),
            ("algorithms.damdc.mu", self.algorithms.damdc.as_ref().map(|p| p.mu)),
        ] {
            if let Some(mu) = mu {
                if !(mu > 0.0) {
                    return Err(invalid(field, "must be positive"));
                }
            }
        }
        if let Some(d) = &self.algorithms.damdc {
            if !(d.eta > 0.0) {
                return Err(invalid("algorithms.damdc.eta", "must be positive"));
            }
        }
        if let Some(rza) = &self.algorithms.rza {
            if rza.rho < 0.0 || rza.eps < 0.0 {
                return Err(invalid("algorithms.rza", "rho and eps must be nonnegative"));
            }
        }
        if let Some(l0) = &self.algorithms.l0 {
            if l0.rho < 0.0 {
                return Err(invalid("algorithms.l0.rho", "must be nonnegative"));
            }
            if !(l0.beta > 0.0) {
                return Err(invalid("algorithms.l0.beta", "must be positive"));
            }
        }
        if let Some(tr) = &self.tracking {
            if tr.band < 1 || tr.band > s.n_basis {
                return Err(invalid(
                    "tracking.band",
                    format!("outside 1..={}", s.n_basis),
                ));
            }
            if tr.power_mw < 0.0 {
                return Err(invalid("tracking.power_mw", "must be nonnegative"));
            }
        }
        Ok(())
    }

    /// Enabled algorithms in their fixed reporting order.
    pub fn enabled_algorithms(&self) -> Vec<AlgorithmId> {
        let mut out = Vec::new();
        if self.algorithms.standard.is_some() {
            out.push(AlgorithmId::Baseline(BaselineKind::Standard));
        }
        if self.algorithms.oracle.is_some() {
            out.push(AlgorithmId::Baseline(BaselineKind::Oracle));
        }
        if self.algorithms.rza.is_some() {
            out.push(AlgorithmId::Baseline(BaselineKind::Rza));
        }
        if self.algorithms.l0.is_some() {
            out.push(AlgorithmId::Baseline(BaselineKind::L0));
        }
        if self.algorithms.damdc.is_some() {
            out.push(AlgorithmId::Damdc);
        }
        out
    }

    /// Restrict the enabled algorithms to the named subset.
    pub fn retain_algorithms(&mut self, names: &[String]) -> Result<(), ConfigError> {
        for name in names {
            if !["standard", "oracle", "rza", "l0", "damdc"].contains(&name.as_str()) {
                return Err(invalid(
                    "algorithms",
                    format!("unknown algorithm '{name}' (expected standard, oracle, rza, l0, damdc)"),
                ));
            }
        }
        let keep = |n: &str| names.iter().any(|s| s == n);
        if !keep("standard") {
            self.algorithms.standard = None;
        }
        if !keep("oracle") {
            self.algorithms.oracle = None;
        }
        if !keep("rza") {
            self.algorithms.rza = None;
        }
        if !keep("l0") {
            self.algorithms.l0 = None;
        }
        if !keep("damdc") {
            self.algorithms.damdc = None;
        }
        if self.enabled_algorithms().is_empty() {
            return Err(invalid("algorithms", "no algorithms left enabled"));
        }
        Ok(())
    }

    /// Full parameter set for one algorithm, with the oracle's support mask
    /// filled in by the caller when needed.
    pub fn algorithm_config(&self, id: AlgorithmId) -> AlgorithmConfig {
        let mut cfg = AlgorithmConfig::default();
        match id {
            AlgorithmId::Baseline(BaselineKind::Standard) => {
                if let Some(p) = &self.algorithms.standard {
                    cfg.mu = p.mu;
                }
            }
            AlgorithmId::Baseline(BaselineKind::Oracle) => {
                if let Some(p) = &self.algorithms.oracle {
                    cfg.mu = p.mu;
                }
            }
            AlgorithmId::Baseline(BaselineKind::Rza) => {
                if let Some(p) = &self.algorithms.rza {
                    cfg.mu = p.mu;
                    cfg.rho_rza = p.rho;
                    cfg.eps_rza = p.eps;
                }
            }
            AlgorithmId::Baseline(BaselineKind::L0) => {
                if let Some(p) = &self.algorithms.l0 {
                    cfg.mu = p.mu;
                    cfg.rho_l0 = p.rho;
                    cfg.beta_l0 = p.beta;
                }
            }
            AlgorithmId::Damdc => {
                if let Some(p) = &self.algorithms.damdc {
                    cfg.mu = p.mu;
                    cfg.eta = p.eta;
                    cfg.tau = p.tau;
                    cfg.p_mode = p.p_mode;
                    cfg.selector_diffusion = p.selector_diffusion;
                    cfg.project_combination = p.project_combination;
                }
            }
        }
        cfg
    }
}

/// Identity of one algorithm instance in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmId {
    Baseline(BaselineKind),
    Damdc,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Baseline(kind) => kind.name(),
            AlgorithmId::Damdc => "damdc",
        }
    }
}

/// Parses and validates a JSON configuration. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
