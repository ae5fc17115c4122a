//! Monte-Carlo experiment orchestration.
//!
//! Builds the network and scenario from a configuration, runs every enabled
//! algorithm on identical per-run measurement streams (paired comparison),
//! averages metrics over runs, and assembles plot-ready CSV artifacts plus a
//! JSON run report. Runs execute in parallel; all randomness is derived from
//! per-(run, node, role) seeds and metric reduction uses a fixed order, so
//! results are bit-identical for any parallelism degree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{
    AlgoError, AlgorithmConfig, BaselineKind, BaselineNetwork, DamdcNetwork, NodeState,
    RegressionSnapshot,
};
use crate::config::{AlgorithmId, ConfigError, ExperimentConfig, TrackingConfig};
use crate::network::{DiffusionNetwork, NetworkError, Topology};
use crate::scalar::Scalar;
use crate::spectrum::{psd_csv, SpectrumError, SpectrumScenario};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Algorithm(#[from] AlgoError),
}

/// Floor reported instead of -infinity when the deviation is zero.
pub const MSD_FLOOR_DB: f64 = -300.0;

/// Linear deviation to dB with the zero-deviation floor applied.
pub fn msd_db_from_linear(lin: f64) -> f64 {
    to_db(lin)
}

fn to_db(lin: f64) -> f64 {
    if !(lin > 0.0) {
        if lin == 0.0 {
            MSD_FLOOR_DB
        } else {
            f64::NAN
        }
    } else {
        (10.0 * lin.log10()).max(MSD_FLOOR_DB)
    }
}

/// Node-averaged squared deviation from the true vector, linear scale.
pub fn msd_linear(node_estimates: &[Vec<f64>], omega0: &[f64]) -> f64 {
    let mut total = 0.0;
    for est in node_estimates {
        let mut node_sum = 0.0;
        for (e, t) in est.iter().zip(omega0) {
            let d = t - e;
            node_sum += d * d;
        }
        total += node_sum;
    }
    total / node_estimates.len() as f64
}

/// Network MSD in dB.
pub fn msd(node_estimates: &[Vec<f64>], omega0: &[f64]) -> f64 {
    to_db(msd_linear(node_estimates, omega0))
}

/// True coefficient vector in effect at `iteration`: the tracked band
/// transmits `power_mw` until `change_iteration` and goes silent after.
pub fn tracking_schedule(
    omega0: &[f64],
    tracking: Option<&TrackingConfig>,
    iteration: usize,
) -> Vec<f64> {
    let mut w0 = omega0.to_vec();
    if let Some(tr) = tracking {
        w0[tr.band - 1] = if iteration < tr.change_iteration {
            tr.power_mw
        } else {
            0.0
        };
    }
    w0
}

/// Fraction of nodes whose binary selector equals the support indicator of
/// `omega0`.
pub fn support_recovery_rate<S: Scalar>(states: &[NodeState<S>], omega0: &[f64]) -> f64 {
    let hits = states
        .iter()
        .filter(|st| {
            st.p_disc
                .iter()
                .zip(omega0)
                .all(|(&p, &w)| p == if w != 0.0 { 1.0 } else { 0.0 })
        })
        .count();
    hits as f64 / states.len() as f64
}

// Seed-stream roles. Everything random is derived from the master seed, a
// role tag, and (for measurements) the run and node indices, so execution
// order cannot change the data.
const ROLE_TOPOLOGY: u64 = 1;
const ROLE_SUPPORT: u64 = 2;
const ROLE_GAINS: u64 = 3;
const ROLE_MEASUREMENT: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable child seed from the master seed and a part list.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix(master);
    for &p in parts {
        s = splitmix(s ^ p);
    }
    s
}

/// Builds the topology from the config: explicit edge list when given,
/// otherwise a seeded random geometric graph.
pub fn build_network(cfg: &ExperimentConfig) -> Result<DiffusionNetwork, ExperimentError> {
    let t = &cfg.topology;
    let topology = match &t.edges {
        Some(edges) => Topology::from_edges(t.n_nodes, edges)?,
        None => Topology::random_geometric(
            t.n_nodes,
            t.connect_radius,
            derive_seed(cfg.master_seed, &[ROLE_TOPOLOGY]),
        )?,
    };
    Ok(DiffusionNetwork::new(topology))
}

/// Builds the spectrum scenario from the config. Support positions and
/// channel gains are fixed per master seed and shared by every run.
pub fn build_scenario(cfg: &ExperimentConfig) -> Result<SpectrumScenario, ExperimentError> {
    let s = &cfg.scenario;
    let bank = crate::spectrum::BasisBank {
        n_basis: s.n_basis,
        n_freq: s.n_freq,
        f_min: s.f_min,
        f_max: s.f_max,
        amplitude: s.basis_amplitude,
    };
    let support: Vec<usize> = match &s.support_bands {
        Some(bands) => bands.iter().map(|&b| b - 1).collect(),
        None => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[ROLE_SUPPORT]));
            let mut idx =
                rand::seq::index::sample(&mut rng, s.n_basis, s.support_size).into_vec();
            idx.sort_unstable();
            idx
        }
    };
    let mut omega0 = vec![0.0; s.n_basis];
    for &m in &support {
        omega0[m] = s.active_power_mw;
    }
    let channel_gain = match s.channel_gain_range {
        Some((lo, hi)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[ROLE_GAINS]));
            let dist = Uniform::new_inclusive(lo, hi).expect("validated gain range");
            (0..cfg.topology.n_nodes).map(|_| dist.sample(&mut rng)).collect()
        }
        None => vec![1.0; cfg.topology.n_nodes],
    };
    Ok(SpectrumScenario {
        bank,
        omega0,
        channel_gain,
        rx_noise_power: s.rx_noise_power,
        obs_noise_var: s.obs_noise_var,
    })
}

/// Run-averaged per-iteration metrics for one algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmSeries {
    pub name: String,
    pub msd_db: Vec<f64>,
    /// Selector-based algorithm only.
    pub support_recovery: Option<Vec<f64>>,
    /// Mean estimated power of the tracked band, when tracking is on.
    pub band_power: Option<Vec<f64>>,
    /// Node-mean final estimate, averaged over runs.
    pub mean_estimate: Vec<f64>,
    pub divergent_runs: usize,
    pub runs_averaged: usize,
    /// Mean over the final 10% of iterations, in dB.
    pub steady_state_msd_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSeries {
    pub n_iterations: usize,
    /// MSD of the zero initial state, reported even when no iterations run.
    pub initial_msd_db: f64,
    pub algorithms: Vec<AlgorithmSeries>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmReport {
    pub name: String,
    pub divergent_runs: usize,
    pub runs_averaged: usize,
    pub steady_state_msd_db: f64,
    pub final_msd_db: f64,
    pub final_support_recovery: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub master_seed: u64,
    pub n_runs: usize,
    pub n_iterations: usize,
    /// Occupied bands, 1-based.
    pub support_bands: Vec<usize>,
    pub topology_seed: u64,
    pub support_seed: u64,
    pub gains_seed: u64,
    pub total_divergent_runs: usize,
    pub algorithms: Vec<AlgorithmReport>,
    /// Echo of the configuration that produced this report.
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub series: MetricsSeries,
    pub report: RunReport,
    pub scenario: SpectrumScenario,
    /// True coefficients in effect at the final iteration.
    pub final_omega0: Vec<f64>,
    pub network: DiffusionNetwork,
}

enum Runner {
    Baseline(BaselineNetwork<f64>),
    Damdc(DamdcNetwork<f64>),
}

impl Runner {
    fn step(
        &mut self,
        snaps: &[RegressionSnapshot<f64>],
        net: &DiffusionNetwork,
    ) -> Result<(), AlgoError> {
        match self {
            Runner::Baseline(b) => b.step(snaps, net),
            Runner::Damdc(d) => d.step(snaps, net),
        }
    }

    fn estimate_into(&self, k: usize, out: &mut [f64]) {
        match self {
            Runner::Baseline(b) => b.node_estimate_into(k, out),
            Runner::Damdc(d) => d.node_estimate_into(k, out),
        }
    }

    fn damdc_states(&self) -> Option<&[NodeState<f64>]> {
        match self {
            Runner::Damdc(d) => Some(&d.states),
            _ => None,
        }
    }
}

struct RunResult {
    /// Per algorithm, per iteration, linear MSD.
    msd_lin: Vec<Vec<f64>>,
    band: Option<Vec<Vec<f64>>>,
    sr: Option<Vec<f64>>,
    diverged: Vec<bool>,
    /// Per algorithm, node-mean final estimate.
    final_est: Vec<Vec<f64>>,
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    net: &'a DiffusionNetwork,
    algs: &'a [AlgorithmId],
    alg_cfgs: &'a [AlgorithmConfig],
    /// Per-node static regressor blocks.
    regressors: &'a [crate::linalg::Mat<f64>],
    /// Noise-free responses per tracking phase, per node.
    clean: &'a [Vec<Vec<f64>>],
    /// True coefficients per tracking phase.
    omega0: &'a [Vec<f64>],
}

fn run_single(shared: &Shared<'_>, run: usize) -> Result<RunResult, ExperimentError> {
    let cfg = shared.cfg;
    let n = shared.net.n_nodes();
    let m = shared.omega0[0].len();
    let n_iter = cfg.n_iterations;
    let n_algs = shared.algs.len();

    let mut runners: Vec<Runner> = Vec::with_capacity(n_algs);
    for (id, acfg) in shared.algs.iter().zip(shared.alg_cfgs) {
        runners.push(match id {
            AlgorithmId::Baseline(kind) => {
                Runner::Baseline(BaselineNetwork::new(*kind, n, m, acfg.clone())?)
            }
            AlgorithmId::Damdc => Runner::Damdc(DamdcNetwork::new(n, m, acfg.clone())),
        });
    }

    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|k| {
            ChaCha8Rng::seed_from_u64(derive_seed(
                cfg.master_seed,
                &[ROLE_MEASUREMENT, run as u64, k as u64],
            ))
        })
        .collect();
    let noise = Normal::new(0.0, cfg.scenario.obs_noise_var.sqrt()).expect("valid noise std");
    let rx = cfg.scenario.rx_noise_power;

    let mut snaps: Vec<RegressionSnapshot<f64>> = shared
        .regressors
        .iter()
        .map(|b| RegressionSnapshot::new(b.clone(), vec![0.0; b.rows()]))
        .collect();

    let has_damdc = shared.algs.contains(&AlgorithmId::Damdc);
    let mut result = RunResult {
        msd_lin: vec![vec![f64::NAN; n_iter]; n_algs],
        band: cfg.tracking.as_ref().map(|_| vec![vec![f64::NAN; n_iter]; n_algs]),
        sr: if has_damdc { Some(vec![f64::NAN; n_iter]) } else { None },
        diverged: vec![false; n_algs],
        final_est: vec![vec![0.0; m]; n_algs],
    };
    let mut est_buf = vec![0.0; m];
    let band_idx = cfg.tracking.as_ref().map(|t| t.band - 1);

    for i in 0..n_iter {
        let phase = match &cfg.tracking {
            Some(t) if i >= t.change_iteration => 1,
            Some(_) => 0,
            None => 0,
        };
        let w0 = &shared.omega0[phase];

        // Record metrics for the state entering this iteration.
        for (a, runner) in runners.iter().enumerate() {
            if result.diverged[a] {
                continue;
            }
            let mut total = 0.0;
            let mut band_sum = 0.0;
            for k in 0..n {
                runner.estimate_into(k, &mut est_buf);
                let mut node_sum = 0.0;
                for mm in 0..m {
                    let d = w0[mm] - est_buf[mm];
                    node_sum += d * d;
                }
                total += node_sum;
                if let Some(b) = band_idx {
                    band_sum += est_buf[b];
                }
            }
            let lin = total / n as f64;
            if !lin.is_finite() {
                result.diverged[a] = true;
                continue;
            }
            result.msd_lin[a][i] = lin;
            if let Some(band) = &mut result.band {
                band[a][i] = band_sum / n as f64;
            }
            if let (Some(sr), Some(states)) = (&mut result.sr, runner.damdc_states()) {
                sr[i] = support_recovery_rate(states, w0);
            }
        }

        // Shared measurement stream for this iteration.
        for k in 0..n {
            let clean = &shared.clean[phase][k];
            let rng = &mut rngs[k];
            for (d, &c) in snaps[k].desired.iter_mut().zip(clean) {
                *d = c + noise.sample(rng) + rx - rx;
            }
        }

        for (a, runner) in runners.iter_mut().enumerate() {
            if result.diverged[a] {
                continue;
            }
            runner.step(&snaps, shared.net)?;
        }
    }

    for (a, runner) in runners.iter().enumerate() {
        if result.diverged[a] {
            // Final-state sanity check also covers the zero-iteration case.
            result.final_est[a] = vec![f64::NAN; m];
            continue;
        }
        let mut mean = vec![0.0; m];
        let mut finite = true;
        for k in 0..n {
            runner.estimate_into(k, &mut est_buf);
            for mm in 0..m {
                mean[mm] += est_buf[mm];
                finite &= est_buf[mm].is_finite();
            }
        }
        if !finite {
            result.diverged[a] = true;
            result.final_est[a] = vec![f64::NAN; m];
        } else {
            for v in mean.iter_mut() {
                *v /= n as f64;
            }
            result.final_est[a] = mean;
        }
    }
    Ok(result)
}

/// Runs the full Monte-Carlo experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let net = build_network(config)?;
    let base_scenario = build_scenario(config)?;

    // Tracking phase 0 applies the schedule's pre-change power, phase 1 the
    // post-change silence. Without tracking there is a single phase.
    let scenarios: Vec<SpectrumScenario> = match &config.tracking {
        Some(tr) => vec![
            base_scenario.with_band_power(tr.band, tr.power_mw)?,
            base_scenario.with_band_power(tr.band, 0.0)?,
        ],
        None => vec![base_scenario.clone()],
    };
    let omega0: Vec<Vec<f64>> = scenarios.iter().map(|s| s.omega0.clone()).collect();
    let n = net.n_nodes();
    let regressors: Vec<crate::linalg::Mat<f64>> = (0..n)
        .map(|k| scenarios[0].node_regressor(k, 0))
        .collect::<Result<_, _>>()?;
    let clean: Vec<Vec<Vec<f64>>> = scenarios
        .iter()
        .map(|s| (0..n).map(|k| s.clean_response(k)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;

    let algs = config.enabled_algorithms();
    let oracle_mask = scenarios[0].support_mask();
    let alg_cfgs: Vec<AlgorithmConfig> = algs
        .iter()
        .map(|&id| {
            let mut c = config.algorithm_config(id);
            if id == AlgorithmId::Baseline(BaselineKind::Oracle) {
                c.oracle_support = Some(oracle_mask.clone());
            }
            c
        })
        .collect();

    let shared = Shared {
        cfg: config,
        net: &net,
        algs: &algs,
        alg_cfgs: &alg_cfgs,
        regressors: &regressors,
        clean: &clean,
        omega0: &omega0,
    };

    let run_results: Vec<RunResult> = (0..config.n_runs)
        .into_par_iter()
        .map(|r| run_single(&shared, r))
        .collect::<Result<_, _>>()?;

    // Fixed-order reduction over runs.
    let n_iter = config.n_iterations;
    let n_algs = algs.len();
    let m = omega0[0].len();
    let mut series_algs = Vec::with_capacity(n_algs);
    let mut report_algs = Vec::with_capacity(n_algs);
    let mut total_divergent = 0usize;
    for (a, &id) in algs.iter().enumerate() {
        let ok_runs: Vec<&RunResult> =
            run_results.iter().filter(|r| !r.diverged[a]).collect();
        let divergent_runs = config.n_runs - ok_runs.len();
        total_divergent += divergent_runs;
        let cnt = ok_runs.len() as f64;

        let mut msd_lin_avg = vec![f64::NAN; n_iter];
        let mut band_avg = config.tracking.as_ref().map(|_| vec![f64::NAN; n_iter]);
        if !ok_runs.is_empty() {
            for i in 0..n_iter {
                let mut acc = 0.0;
                for r in &ok_runs {
                    acc += r.msd_lin[a][i];
                }
                msd_lin_avg[i] = acc / cnt;
            }
            if let Some(band_avg) = &mut band_avg {
                for i in 0..n_iter {
                    let mut acc = 0.0;
                    for r in &ok_runs {
                        acc += r.band.as_ref().expect("tracking on")[a][i];
                    }
                    band_avg[i] = acc / cnt;
                }
            }
        }
        let sr_avg = if id == AlgorithmId::Damdc && !ok_runs.is_empty() {
            let mut sr = vec![f64::NAN; n_iter];
            for i in 0..n_iter {
                let mut acc = 0.0;
                for r in &ok_runs {
                    acc += r.sr.as_ref().expect("selector series")[i];
                }
                sr[i] = acc / cnt;
            }
            Some(sr)
        } else {
            None
        };
        let mut mean_estimate = vec![f64::NAN; m];
        if !ok_runs.is_empty() {
            for mm in 0..m {
                let mut acc = 0.0;
                for r in &ok_runs {
                    acc += r.final_est[a][mm];
                }
                mean_estimate[mm] = acc / cnt;
            }
        }

        let tail = n_iter.max(10) / 10;
        let steady = if n_iter == 0 || ok_runs.is_empty() {
            f64::NAN
        } else {
            let window = &msd_lin_avg[n_iter - tail.min(n_iter)..];
            to_db(window.iter().sum::<f64>() / window.len() as f64)
        };
        let final_msd = if n_iter == 0 || ok_runs.is_empty() {
            f64::NAN
        } else {
            to_db(msd_lin_avg[n_iter - 1])
        };
        let msd_db: Vec<f64> = msd_lin_avg.iter().map(|&l| to_db(l)).collect();

        report_algs.push(AlgorithmReport {
            name: id.name().to_string(),
            divergent_runs,
            runs_averaged: ok_runs.len(),
            steady_state_msd_db: steady,
            final_msd_db: final_msd,
            final_support_recovery: sr_avg.as_ref().and_then(|sr| sr.last().copied()),
        });
        series_algs.push(AlgorithmSeries {
            name: id.name().to_string(),
            msd_db,
            support_recovery: sr_avg,
            band_power: band_avg,
            mean_estimate,
            divergent_runs,
            runs_averaged: ok_runs.len(),
            steady_state_msd_db: steady,
        });
    }

    let zeros = vec![vec![0.0; m]; n];
    let series = MetricsSeries {
        n_iterations: n_iter,
        initial_msd_db: msd(&zeros, &omega0[0]),
        algorithms: series_algs,
    };
    let report = RunReport {
        master_seed: config.master_seed,
        n_runs: config.n_runs,
        n_iterations: n_iter,
        support_bands: base_scenario.support_bands(),
        topology_seed: derive_seed(config.master_seed, &[ROLE_TOPOLOGY]),
        support_seed: derive_seed(config.master_seed, &[ROLE_SUPPORT]),
        gains_seed: derive_seed(config.master_seed, &[ROLE_GAINS]),
        total_divergent_runs: total_divergent,
        algorithms: report_algs,
        config: config.clone(),
    };
    let final_omega0 = omega0.last().expect("at least one phase").clone();
    Ok(ExperimentOutput {
        series,
        report,
        scenario: base_scenario,
        final_omega0,
        network: net,
    })
}

fn fmt_metric(v: f64) -> String {
    format!("{v:.10}")
}

/// Per-algorithm metrics CSV: `iteration,msd_db,support_recovery[,band_power]`.
/// The support-recovery column is empty for algorithms without a selector.
pub fn metrics_csv(alg: &AlgorithmSeries) -> String {
    let mut out = String::from("iteration,msd_db,support_recovery");
    let has_band = alg.band_power.is_some();
    if has_band {
        out.push_str(",band_power");
    }
    out.push('\n');
    for i in 0..alg.msd_db.len() {
        out.push_str(&i.to_string());
        out.push(',');
        out.push_str(&fmt_metric(alg.msd_db[i]));
        out.push(',');
        if let Some(sr) = &alg.support_recovery {
            out.push_str(&format!("{:.6}", sr[i]));
        }
        if let Some(band) = &alg.band_power {
            out.push(',');
            out.push_str(&fmt_metric(band[i]));
        }
        out.push('\n');
    }
    out
}

/// All artifacts of one experiment as (file name, contents) pairs.
pub fn artifact_files(out: &ExperimentOutput) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for alg in &out.series.algorithms {
        files.push((format!("metrics_{}.csv", alg.name), metrics_csv(alg)));
    }
    files.push((
        "psd_true.csv".to_string(),
        psd_csv(&out.scenario.bank, &out.final_omega0),
    ));
    for alg in &out.series.algorithms {
        files.push((
            format!("psd_{}.csv", alg.name),
            psd_csv(&out.scenario.bank, &alg.mean_estimate),
        ));
    }
    files.push((
        "report.json".to_string(),
        serde_json::to_string_pretty(&out.report).expect("serializable report") + "\n",
    ));
    files.push(("topology.csv".to_string(), out.network.topology.adjacency_csv()));
    files.push(("combiner.csv".to_string(), out.network.combiner.to_csv()));
    files
}
