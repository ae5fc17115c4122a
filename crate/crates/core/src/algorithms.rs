//! Per-node adaptive recursions and the adapt-then-combine protocol.
//!
//! The main algorithm alternates two coupled recursions at every node:
//! a continuous weight vector `omega` adapted by LMS, and a binary tap
//! selector `p_disc` obtained by thresholding a continuous accumulator
//! `p_cont`. The selector gates both the error and the weight update, so a
//! converged selector makes the filter behave like the genie-aided oracle
//! that knows the true support.
//!
//! Baselines: standard diffusion LMS, the oracle, and two sparsity-penalized
//! variants (reweighted zero attraction and an exponential approximation of
//! the l0 norm).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Mat};
use crate::network::DiffusionNetwork;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum AlgoError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("state has {state} taps but regressor has {snap} columns")]
    TapCountMismatch { state: usize, snap: usize },
    #[error("non-finite value produced by {0} (step size too large?)")]
    NonFinite(&'static str),
    #[error("oracle baseline requires oracle_support in the config")]
    MissingOracleSupport,
    #[error("oracle_support has {found} entries, expected {expected}")]
    OracleSupportLength { found: usize, expected: usize },
    #[error("combination weights over the supplied neighbors sum to {0}, expected 1")]
    WeightSumMismatch(f64),
    #[error("combination refers to node {0} outside the weight column (length {1})")]
    NeighborOutOfRange(usize, usize),
    #[error("neighbor {0} supplied an estimate of length {1}, expected {2}")]
    NeighborLengthMismatch(usize, usize, usize),
}

/// How the continuous selector accumulator evolves.
///
/// `LiteralOverwrite` replaces the accumulator with its binary image after
/// every threshold, so the recursion runs on the quantized state.
/// `SoftState` keeps the continuous accumulator across iterations and only
/// derives the binary selector from it. The soft form is the default: on the
/// spectrum scenario the literal form freezes once a selector entry drops,
/// because reactivating it would require a single update of magnitude one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PMode {
    LiteralOverwrite,
    SoftState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Standard,
    Oracle,
    Rza,
    L0,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Standard => "standard",
            BaselineKind::Oracle => "oracle",
            BaselineKind::Rza => "rza",
            BaselineKind::L0 => "l0",
        }
    }
}

/// Step sizes, penalties, and protocol switches for one algorithm instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    /// Weight-update step size.
    pub mu: f64,
    /// Selector-update step size.
    pub eta: f64,
    /// Selector threshold.
    pub tau: f64,
    /// Reweighted zero-attraction penalty weight and denominator offset.
    pub rho_rza: f64,
    pub eps_rza: f64,
    /// l0-approximation penalty weight and shape.
    pub rho_l0: f64,
    pub beta_l0: f64,
    /// True support mask (1.0/0.0 entries), oracle baseline only.
    pub oracle_support: Option<Vec<f64>>,
    pub p_mode: PMode,
    /// Diffuse the selector accumulator with the same combining weights as
    /// the intermediate estimates. Purely local selector updates leave each
    /// node's inactive selectors hovering at the threshold; averaging over
    /// the neighborhood suppresses that boundary random walk and lets the
    /// whole network settle on one support.
    pub selector_diffusion: bool,
    /// Apply the selector to the combined estimate (spectrum-mode protocol).
    /// The unprojected combination is kept as a companion state that drives
    /// the selector recursion, so a momentarily dropped tap can recover.
    pub project_combination: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            mu: 0.05,
            eta: 0.05,
            tau: 1.0,
            rho_rza: 3.5e-5,
            eps_rza: 0.1,
            rho_l0: 3.5e-5,
            beta_l0: 5.0,
            oracle_support: None,
            p_mode: PMode::SoftState,
            selector_diffusion: true,
            project_combination: true,
        }
    }
}

/// One iteration's data for one node: an R x M regressor block and the
/// length-R measurement vector (R = 1 in scalar mode, R = N_c in spectrum
/// mode).
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSnapshot<S> {
    pub regressor: Mat<S>,
    pub desired: Vec<S>,
}

impl<S: Scalar> RegressionSnapshot<S> {
    pub fn new(regressor: Mat<S>, desired: Vec<S>) -> Self {
        assert_eq!(regressor.rows(), desired.len());
        Self { regressor, desired }
    }

    pub fn n_taps(&self) -> usize {
        self.regressor.cols()
    }
}

/// Adaptive state of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState<S> {
    /// Continuous weight vector (the reported estimate).
    pub omega: Vec<S>,
    /// Unprojected combined weights; equals `omega` when projection is off.
    pub companion: Vec<S>,
    /// Continuous selector accumulator.
    pub p_cont: Vec<f64>,
    /// Binary selector, entries in {0, 1}.
    pub p_disc: Vec<f64>,
    /// Intermediate estimate produced by the adapt phase.
    pub phi: Vec<S>,
}

impl<S: Scalar> NodeState<S> {
    /// Weights start at zero, selectors at all-ones.
    pub fn new(n_taps: usize) -> Self {
        Self {
            omega: vec![S::zero(); n_taps],
            companion: vec![S::zero(); n_taps],
            p_cont: vec![1.0; n_taps],
            p_disc: vec![1.0; n_taps],
            phi: vec![S::zero(); n_taps],
        }
    }

    pub fn n_taps(&self) -> usize {
        self.omega.len()
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().all(|v| v.is_finite())
            && self.companion.iter().all(|v| v.is_finite())
            && self.p_cont.iter().all(|v| v.is_finite())
    }

    fn check_snap(&self, snap: &RegressionSnapshot<S>) -> Result<(), AlgoError> {
        if self.n_taps() != snap.n_taps() {
            return Err(AlgoError::TapCountMismatch {
                state: self.n_taps(),
                snap: snap.n_taps(),
            });
        }
        Ok(())
    }
}

/// Error signals of the two recursions at the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSignals<S> {
    pub e_p: Vec<S>,
    pub e_w: Vec<S>,
}

/// e = desired - regressor * (weights o selector), with an optional
/// elementwise conjugation of the weights.
fn gated_error<S: Scalar>(
    snap: &RegressionSnapshot<S>,
    weights: &[S],
    selector: &[f64],
    conjugate: bool,
    scratch: &mut Vec<S>,
    out: &mut Vec<S>,
) -> Result<(), AlgoError> {
    scratch.clear();
    scratch.extend(weights.iter().zip(selector).map(|(&w, &p)| {
        let w = if conjugate { w.conj() } else { w };
        w.scale(p)
    }));
    out.resize(snap.desired.len(), S::zero());
    snap.regressor.mul_vec_into(scratch, out)?;
    for (o, &d) in out.iter_mut().zip(&snap.desired) {
        *o = d - *o;
    }
    Ok(())
}

/// Selector-branch error: e_p = desired - regressor * (diag(omega) * p_cont).
pub fn p_error<S: Scalar>(
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
) -> Result<Vec<S>, AlgoError> {
    state.check_snap(snap)?;
    let mut out = Vec::new();
    gated_error(snap, &state.omega, &state.p_cont, false, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// Weight-branch error: e_w = desired - regressor * (diag(p_disc) * conj(omega)).
/// The conjugation is an identity in real mode.
pub fn w_error<S: Scalar>(
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
) -> Result<Vec<S>, AlgoError> {
    state.check_snap(snap)?;
    let mut out = Vec::new();
    gated_error(snap, &state.omega, &state.p_disc, true, &mut Vec::new(), &mut out)?;
    Ok(out)
}

pub fn error_signals<S: Scalar>(
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
) -> Result<ErrorSignals<S>, AlgoError> {
    Ok(ErrorSignals {
        e_p: p_error(state, snap)?,
        e_w: w_error(state, snap)?,
    })
}

/// Stochastic-gradient step of the selector accumulator:
/// p_cont + 2 eta Re(conj(omega) o (regressor^H e_p)).
pub fn p_update<S: Scalar>(
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
    eta: f64,
) -> Result<Vec<f64>, AlgoError> {
    let e_p = p_error(state, snap)?;
    let g = snap.regressor.herm_mul_vec(&e_p)?;
    let out: Vec<f64> = state
        .p_cont
        .iter()
        .zip(state.omega.iter().zip(&g))
        .map(|(&p, (&w, &gm))| p + 2.0 * eta * (w.conj() * gm).re())
        .collect();
    if !out.iter().all(|v| v.is_finite()) {
        return Err(AlgoError::NonFinite("p_update"));
    }
    Ok(out)
}

/// Componentwise non-strict threshold. The all-ones initialization sits
/// exactly at the default threshold of one, so a strict comparison would zero
/// every selector at the first iteration and freeze the recursion.
pub fn threshold_map(p_cont: &[f64], tau: f64) -> Vec<f64> {
    p_cont.iter().map(|&p| if p >= tau { 1.0 } else { 0.0 }).collect()
}

/// Gated LMS step: phi = omega + mu * p_disc o (regressor^T conj(e_w)).
pub fn w_adapt<S: Scalar>(
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
    mu: f64,
) -> Result<Vec<S>, AlgoError> {
    let e_w = w_error(state, snap)?;
    let conj_e: Vec<S> = e_w.iter().map(|&e| e.conj()).collect();
    let g = snap.regressor.trans_mul_vec(&conj_e)?;
    let out: Vec<S> = state
        .omega
        .iter()
        .zip(state.p_disc.iter().zip(&g))
        .map(|(&w, (&p, &gm))| w + gm.scale(mu * p))
        .collect();
    if !out.iter().all(|v| v.is_finite()) {
        return Err(AlgoError::NonFinite("w_adapt"));
    }
    Ok(out)
}

/// Instantaneous selector-branch cost |desired - regressor (diag(omega) p)|^2.
pub fn p_cost<S: Scalar>(snap: &RegressionSnapshot<S>, p: &[f64], omega: &[S]) -> f64 {
    let gated: Vec<S> = omega.iter().zip(p).map(|(&w, &pm)| w.scale(pm)).collect();
    let y = snap.regressor.mul_vec(&gated).expect("dimension mismatch");
    snap.desired
        .iter()
        .zip(&y)
        .map(|(&d, &ym)| (d - ym).norm_sq())
        .sum()
}

/// Analytic gradient of `p_cost` with respect to the real selector vector.
pub fn p_gradient<S: Scalar>(snap: &RegressionSnapshot<S>, p: &[f64], omega: &[S]) -> Vec<f64> {
    let gated: Vec<S> = omega.iter().zip(p).map(|(&w, &pm)| w.scale(pm)).collect();
    let y = snap.regressor.mul_vec(&gated).expect("dimension mismatch");
    let e: Vec<S> = snap.desired.iter().zip(&y).map(|(&d, &ym)| d - ym).collect();
    let bh_e = snap.regressor.herm_mul_vec(&e).expect("dimension mismatch");
    omega
        .iter()
        .zip(&bh_e)
        .map(|(&w, &gm)| -2.0 * (w.conj() * gm).re())
        .collect()
}

/// Instantaneous weight-branch cost |desired - regressor (diag(p) conj(omega))|^2.
pub fn w_cost<S: Scalar>(snap: &RegressionSnapshot<S>, p_disc: &[f64], omega: &[S]) -> f64 {
    let gated: Vec<S> = omega
        .iter()
        .zip(p_disc)
        .map(|(&w, &pm)| w.conj().scale(pm))
        .collect();
    let y = snap.regressor.mul_vec(&gated).expect("dimension mismatch");
    snap.desired
        .iter()
        .zip(&y)
        .map(|(&d, &ym)| (d - ym).norm_sq())
        .sum()
}

/// Conjugate-Wirtinger gradient of `w_cost` with respect to omega:
/// -p o (regressor^T conj(e)). The LMS step moves along the negative of this.
pub fn w_gradient<S: Scalar>(snap: &RegressionSnapshot<S>, p_disc: &[f64], omega: &[S]) -> Vec<S> {
    let gated: Vec<S> = omega
        .iter()
        .zip(p_disc)
        .map(|(&w, &pm)| w.conj().scale(pm))
        .collect();
    let y = snap.regressor.mul_vec(&gated).expect("dimension mismatch");
    let conj_e: Vec<S> = snap
        .desired
        .iter()
        .zip(&y)
        .map(|(&d, &ym)| (d - ym).conj())
        .collect();
    let bt_e = snap.regressor.trans_mul_vec(&conj_e).expect("dimension mismatch");
    p_disc
        .iter()
        .zip(&bt_e)
        .map(|(&pm, &gm)| -gm.scale(pm))
        .collect()
}

/// Convex combination of neighbor estimates: omega = sum_l a_lk phi_l, with an
/// optional selector projection applied to the result.
///
/// `weights` is the full combiner column for the destination node;
/// `neighbor_phis` must cover every node with nonzero weight.
pub fn combine<S: Scalar>(
    neighbor_phis: &[(usize, &[S])],
    weights: &[f64],
    selector: Option<&[f64]>,
) -> Result<Vec<S>, AlgoError> {
    let n_taps = neighbor_phis
        .first()
        .map(|(_, phi)| phi.len())
        .unwrap_or(0);
    let mut out = vec![S::zero(); n_taps];
    let mut weight_sum = 0.0;
    for &(l, phi) in neighbor_phis {
        if l >= weights.len() {
            return Err(AlgoError::NeighborOutOfRange(l, weights.len()));
        }
        if phi.len() != n_taps {
            return Err(AlgoError::NeighborLengthMismatch(l, phi.len(), n_taps));
        }
        let a = weights[l];
        weight_sum += a;
        for (o, &v) in out.iter_mut().zip(phi) {
            *o += v.scale(a);
        }
    }
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(AlgoError::WeightSumMismatch(weight_sum));
    }
    if let Some(p) = selector {
        for (o, &pm) in out.iter_mut().zip(p) {
            *o = o.scale(pm);
        }
    }
    Ok(out)
}

/// One full iteration of the selector-gated algorithm at a single node, with
/// `neighbor_phis` holding the other neighbors' intermediate estimates (this
/// node's own is computed here). Selector diffusion needs the network driver
/// and does not apply at this granularity.
pub fn damdc_iteration<S: Scalar>(
    node: usize,
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
    config: &AlgorithmConfig,
    weights: &[f64],
    neighbor_phis: &[(usize, &[S])],
) -> Result<NodeState<S>, AlgoError> {
    state.check_snap(snap)?;
    let selector_weights = if config.project_combination {
        &state.companion
    } else {
        &state.omega
    };
    // Selector half-step, evaluated at the applied binary selector.
    let mut e_p = Vec::new();
    gated_error(snap, selector_weights, &state.p_disc, false, &mut Vec::new(), &mut e_p)?;
    let g = snap.regressor.herm_mul_vec(&e_p)?;
    let p_next: Vec<f64> = state
        .p_cont
        .iter()
        .zip(selector_weights.iter().zip(&g))
        .map(|(&p, (&w, &gm))| p + 2.0 * config.eta * (w.conj() * gm).re())
        .collect();
    if !p_next.iter().all(|v| v.is_finite()) {
        return Err(AlgoError::NonFinite("p_update"));
    }
    let p_disc = threshold_map(&p_next, config.tau);
    let p_cont = match config.p_mode {
        PMode::LiteralOverwrite => p_disc.clone(),
        PMode::SoftState => p_next,
    };

    // Weight half-step with the fresh selector.
    let gated_state = NodeState {
        omega: state.omega.clone(),
        companion: state.companion.clone(),
        p_cont: p_cont.clone(),
        p_disc: p_disc.clone(),
        phi: state.phi.clone(),
    };
    let phi = w_adapt(&gated_state, snap, config.mu)?;

    let mut all_phis: Vec<(usize, &[S])> = Vec::with_capacity(neighbor_phis.len() + 1);
    all_phis.push((node, &phi));
    all_phis.extend_from_slice(neighbor_phis);
    let combined = combine(&all_phis, weights, None)?;
    let omega = if config.project_combination {
        combined
            .iter()
            .zip(&p_disc)
            .map(|(&c, &pm)| c.scale(pm))
            .collect()
    } else {
        combined.clone()
    };
    Ok(NodeState {
        omega,
        companion: combined,
        p_cont,
        p_disc,
        phi,
    })
}

/// One full iteration of a baseline at a single node.
pub fn baseline_iteration<S: Scalar>(
    kind: BaselineKind,
    node: usize,
    state: &NodeState<S>,
    snap: &RegressionSnapshot<S>,
    config: &AlgorithmConfig,
    weights: &[f64],
    neighbor_phis: &[(usize, &[S])],
) -> Result<NodeState<S>, AlgoError> {
    state.check_snap(snap)?;
    let mask = baseline_mask(kind, config, state.n_taps())?;
    let mut e = Vec::new();
    gated_error(snap, &state.omega, &mask, true, &mut Vec::new(), &mut e)?;
    for v in e.iter_mut() {
        *v = v.conj();
    }
    let g = snap.regressor.trans_mul_vec(&e)?;
    let mut phi: Vec<S> = state
        .omega
        .iter()
        .zip(mask.iter().zip(&g))
        .map(|(&w, (&pm, &gm))| w + gm.scale(config.mu * pm))
        .collect();
    apply_sparsity_penalty(kind, config, &state.omega, &mut phi);
    if !phi.iter().all(|v| v.is_finite()) {
        return Err(AlgoError::NonFinite("baseline_iteration"));
    }

    let mut all_phis: Vec<(usize, &[S])> = Vec::with_capacity(neighbor_phis.len() + 1);
    all_phis.push((node, &phi));
    all_phis.extend_from_slice(neighbor_phis);
    let omega = combine(&all_phis, weights, None)?;
    Ok(NodeState {
        companion: omega.clone(),
        omega,
        p_cont: state.p_cont.clone(),
        p_disc: state.p_disc.clone(),
        phi,
    })
}

fn baseline_mask(
    kind: BaselineKind,
    config: &AlgorithmConfig,
    n_taps: usize,
) -> Result<Vec<f64>, AlgoError> {
    match kind {
        BaselineKind::Oracle => {
            let mask = config
                .oracle_support
                .as_ref()
                .ok_or(AlgoError::MissingOracleSupport)?;
            if mask.len() != n_taps {
                return Err(AlgoError::OracleSupportLength {
                    found: mask.len(),
                    expected: n_taps,
                });
            }
            Ok(mask.clone())
        }
        _ => Ok(vec![1.0; n_taps]),
    }
}

fn apply_sparsity_penalty<S: Scalar>(
    kind: BaselineKind,
    config: &AlgorithmConfig,
    omega: &[S],
    phi: &mut [S],
) {
    match kind {
        BaselineKind::Rza => {
            for (p, &w) in phi.iter_mut().zip(omega) {
                *p -= rza_attraction(w, config.rho_rza, config.eps_rza);
            }
        }
        BaselineKind::L0 => {
            for (p, &w) in phi.iter_mut().zip(omega) {
                *p -= l0_attraction(w, config.rho_l0, config.beta_l0);
            }
        }
        _ => {}
    }
}

/// Reweighted zero attraction rho * sign(w) / (1 + eps |w|).
pub fn rza_attraction<S: Scalar>(w: S, rho: f64, eps: f64) -> S {
    w.unit_sign().scale(rho / (1.0 + eps * w.modulus()))
}

/// l0-approximation attraction rho * beta * sign(w) * exp(-beta |w|).
pub fn l0_attraction<S: Scalar>(w: S, rho: f64, beta: f64) -> S {
    w.unit_sign().scale(rho * beta * (-beta * w.modulus()).exp())
}

/// Network-wide driver for the selector-gated algorithm. All nodes finish the
/// adapt phase before any node combines, so results are independent of node
/// execution order.
#[derive(Debug, Clone)]
pub struct DamdcNetwork<S> {
    pub cfg: AlgorithmConfig,
    pub states: Vec<NodeState<S>>,
    p_scratch: Vec<Vec<f64>>,
    comb_scratch: Vec<Vec<S>>,
    vec_scratch: Vec<S>,
    err_scratch: Vec<S>,
    grad_scratch: Vec<S>,
}

impl<S: Scalar> DamdcNetwork<S> {
    pub fn new(n_nodes: usize, n_taps: usize, cfg: AlgorithmConfig) -> Self {
        Self {
            cfg,
            states: vec![NodeState::new(n_taps); n_nodes],
            p_scratch: vec![vec![0.0; n_taps]; n_nodes],
            comb_scratch: vec![vec![S::zero(); n_taps]; n_nodes],
            vec_scratch: Vec::new(),
            err_scratch: Vec::new(),
            grad_scratch: vec![S::zero(); n_taps],
        }
    }

    pub fn step(
        &mut self,
        snaps: &[RegressionSnapshot<S>],
        net: &DiffusionNetwork,
    ) -> Result<(), AlgoError> {
        let n = self.states.len();
        let eta = self.cfg.eta;

        // Selector adapt phase.
        for k in 0..n {
            let st = &self.states[k];
            st.check_snap(&snaps[k])?;
            let wt = if self.cfg.project_combination {
                &st.companion
            } else {
                &st.omega
            };
            gated_error(
                &snaps[k],
                wt,
                &st.p_disc,
                false,
                &mut self.vec_scratch,
                &mut self.err_scratch,
            )?;
            snaps[k]
                .regressor
                .herm_mul_vec_into(&self.err_scratch, &mut self.grad_scratch)?;
            let out = &mut self.p_scratch[k];
            for m in 0..out.len() {
                out[m] = st.p_cont[m] + 2.0 * eta * (wt[m].conj() * self.grad_scratch[m]).re();
            }
        }

        // Selector exchange and threshold.
        if self.cfg.selector_diffusion {
            for k in 0..n {
                let st = &mut self.states[k];
                st.p_cont.fill(0.0);
                for &l in &net.neighbors[k] {
                    let a = net.combiner.get(l, k);
                    for (acc, &v) in st.p_cont.iter_mut().zip(&self.p_scratch[l]) {
                        *acc += a * v;
                    }
                }
            }
        } else {
            for k in 0..n {
                self.states[k].p_cont.copy_from_slice(&self.p_scratch[k]);
            }
        }
        for st in self.states.iter_mut() {
            for m in 0..st.p_disc.len() {
                st.p_disc[m] = if st.p_cont[m] >= self.cfg.tau { 1.0 } else { 0.0 };
            }
            if self.cfg.p_mode == PMode::LiteralOverwrite {
                st.p_cont.copy_from_slice(&st.p_disc);
            }
        }

        // Weight adapt phase with the fresh selector.
        for k in 0..n {
            let st = &self.states[k];
            gated_error(
                &snaps[k],
                &st.omega,
                &st.p_disc,
                true,
                &mut self.vec_scratch,
                &mut self.err_scratch,
            )?;
            for v in self.err_scratch.iter_mut() {
                *v = v.conj();
            }
            snaps[k]
                .regressor
                .trans_mul_vec_into(&self.err_scratch, &mut self.grad_scratch)?;
            let st = &mut self.states[k];
            for m in 0..st.phi.len() {
                st.phi[m] =
                    st.omega[m] + self.grad_scratch[m].scale(self.cfg.mu * st.p_disc[m]);
            }
        }

        // Combination phase.
        for k in 0..n {
            let out = &mut self.comb_scratch[k];
            out.fill(S::zero());
            for &l in &net.neighbors[k] {
                let a = net.combiner.get(l, k);
                for (acc, &v) in out.iter_mut().zip(&self.states[l].phi) {
                    *acc += v.scale(a);
                }
            }
        }
        for k in 0..n {
            let st = &mut self.states[k];
            st.companion.copy_from_slice(&self.comb_scratch[k]);
            if self.cfg.project_combination {
                for m in 0..st.omega.len() {
                    st.omega[m] = self.comb_scratch[k][m].scale(st.p_disc[m]);
                }
            } else {
                st.omega.copy_from_slice(&self.comb_scratch[k]);
            }
        }
        Ok(())
    }

    /// The estimate a node would report: the projected weights.
    pub fn node_estimate_into(&self, k: usize, out: &mut [S]) {
        let st = &self.states[k];
        if self.cfg.project_combination {
            out.copy_from_slice(&st.omega);
        } else {
            for m in 0..out.len() {
                out[m] = st.omega[m].scale(st.p_disc[m]);
            }
        }
    }
}

/// Network-wide driver for the baseline algorithms.
#[derive(Debug, Clone)]
pub struct BaselineNetwork<S> {
    pub kind: BaselineKind,
    pub cfg: AlgorithmConfig,
    pub states: Vec<NodeState<S>>,
    comb_scratch: Vec<Vec<S>>,
    vec_scratch: Vec<S>,
    err_scratch: Vec<S>,
    grad_scratch: Vec<S>,
    mask: Vec<f64>,
}

impl<S: Scalar> BaselineNetwork<S> {
    pub fn new(
        kind: BaselineKind,
        n_nodes: usize,
        n_taps: usize,
        cfg: AlgorithmConfig,
    ) -> Result<Self, AlgoError> {
        let mask = baseline_mask(kind, &cfg, n_taps)?;
        Ok(Self {
            kind,
            cfg,
            states: vec![NodeState::new(n_taps); n_nodes],
            comb_scratch: vec![vec![S::zero(); n_taps]; n_nodes],
            vec_scratch: Vec::new(),
            err_scratch: Vec::new(),
            grad_scratch: vec![S::zero(); n_taps],
            mask,
        })
    }

    pub fn step(
        &mut self,
        snaps: &[RegressionSnapshot<S>],
        net: &DiffusionNetwork,
    ) -> Result<(), AlgoError> {
        let n = self.states.len();
        for k in 0..n {
            let st = &self.states[k];
            st.check_snap(&snaps[k])?;
            gated_error(
                &snaps[k],
                &st.omega,
                &self.mask,
                true,
                &mut self.vec_scratch,
                &mut self.err_scratch,
            )?;
            for v in self.err_scratch.iter_mut() {
                *v = v.conj();
            }
            snaps[k]
                .regressor
                .trans_mul_vec_into(&self.err_scratch, &mut self.grad_scratch)?;
            let mu = self.cfg.mu;
            let (kind, cfg) = (self.kind, &self.cfg);
            let mask = &self.mask;
            let st = &mut self.states[k];
            for m in 0..st.phi.len() {
                st.phi[m] = st.omega[m] + self.grad_scratch[m].scale(mu * mask[m]);
            }
            match kind {
                BaselineKind::Rza => {
                    for m in 0..st.phi.len() {
                        st.phi[m] -= rza_attraction(st.omega[m], cfg.rho_rza, cfg.eps_rza);
                    }
                }
                BaselineKind::L0 => {
                    for m in 0..st.phi.len() {
                        st.phi[m] -= l0_attraction(st.omega[m], cfg.rho_l0, cfg.beta_l0);
                    }
                }
                _ => {}
            }
        }
        for k in 0..n {
            let out = &mut self.comb_scratch[k];
            out.fill(S::zero());
            for &l in &net.neighbors[k] {
                let a = net.combiner.get(l, k);
                for (acc, &v) in out.iter_mut().zip(&self.states[l].phi) {
                    *acc += v.scale(a);
                }
            }
        }
        for k in 0..n {
            let st = &mut self.states[k];
            st.omega.copy_from_slice(&self.comb_scratch[k]);
            st.companion.copy_from_slice(&self.comb_scratch[k]);
        }
        Ok(())
    }

    pub fn node_estimate_into(&self, k: usize, out: &mut [S]) {
        out.copy_from_slice(&self.states[k].omega);
    }
}
