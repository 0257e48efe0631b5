use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::DVector;

use super::{IterateState, MultiBlockProblem, SolverConfig, SubproblemInput};
use crate::error::{Error, Result};
use crate::SolveStatus;

/// Iterate norm beyond which a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Window for the trailing averages reported in [`SolveResult`].
const TAIL_WINDOW: usize = 10;

/// Output of the semi-proximal Gauss–Seidel sweep.
#[derive(Clone, Debug)]
pub struct Prediction {
    /// `z_i^{k+1}` for every block.
    pub z: Vec<DVector<f64>>,
    /// `𝒜_i* z_i^{k+1}`.
    pub adj: Vec<DVector<f64>>,
    /// `F(z₁^{k+1}, z̃₂ᵏ, …, z̃_pᵏ)`.
    pub f_pred: DVector<f64>,
    /// `F(z₁^{k+1}, …, z_p^{k+1})`.
    pub f_full: DVector<f64>,
}

/// Runs the sweep `i = 1..p` with proximal centers `z̃ᵏ`.
pub fn predict(state: &IterateState, prob: &MultiBlockProblem, cfg: &SolverConfig) -> Result<Prediction> {
    let p = prob.num_blocks();
    // acc = Σ_{j<i} 𝒜_j* z_j^{k+1} + Σ_{j≥i} 𝒜_j* z̃_jᵏ − c
    let mut acc = -prob.c().clone();
    for a in &state.adj_tilde {
        acc += a;
    }
    let mut z = Vec::with_capacity(p);
    let mut adj = Vec::with_capacity(p);
    let mut f_pred = None;
    for (i, block) in prob.blocks().iter().enumerate() {
        let partial = &acc - &state.adj_tilde[i];
        let input = SubproblemInput {
            multiplier: &state.x,
            partial_residual: &partial,
            center: &state.z_tilde[i],
            sigma: cfg.sigma,
        };
        let zi = block.subsolve(&input).map_err(|reason| Error::Subproblem { block: i, reason })?;
        if zi.len() != block.dim() {
            return Err(Error::Subproblem {
                block: i,
                reason: format!("returned length {}, expected {}", zi.len(), block.dim()),
            });
        }
        let ai = block.map().apply_adjoint(&zi);
        acc = partial + &ai;
        if i == 0 {
            f_pred = Some(acc.clone());
        }
        z.push(zi);
        adj.push(ai);
    }
    Ok(Prediction { z, adj, f_pred: f_pred.expect("at least one block"), f_full: acc })
}

/// Infeasibility ratio
/// `δ = (‖F_pred‖² − ε(‖F_full‖² + ‖𝒜_p*Δz_p‖²)) / ‖F_full‖²`,
/// with `+∞` when `F_full = 0`.
pub fn compute_delta(f_pred_sq: f64, f_full_sq: f64, last_block_change_sq: f64, eps: f64) -> f64 {
    if f_full_sq == 0.0 {
        return f64::INFINITY;
    }
    (f_pred_sq - eps * (f_full_sq + last_block_change_sq)) / f_full_sq
}

/// `τ_k = min(1 + δ, τ_{k−1})` if `1 + δ > τ̄`, else `τ̄`.
pub fn update_tau(tau_prev: f64, delta: f64, tau_bar: f64) -> f64 {
    if 1.0 + delta > tau_bar {
        (1.0 + delta).min(tau_prev)
    } else {
        tau_bar
    }
}

/// `x + τσF`
pub fn update_multiplier(x: &DVector<f64>, tau: f64, sigma: f64, f_full: &DVector<f64>) -> DVector<f64> {
    x + f_full * (tau * sigma)
}

/// Correction step: `z̃₁ = z₁`, `z̃_p = z_p`, and for `i = p−1, …, 2`
/// `z̃_i⁺ = z̃_i + α(z_i⁺ − z̃_i) − ℰ_i⁻¹𝒜_i Σ_{j>i} 𝒜_j*(z̃_j⁺ − z̃_j)`.
///
/// Returns the new corrected values and their adjoint images.
pub fn correct(
    prob: &MultiBlockProblem,
    state: &IterateState,
    pred: &Prediction,
    alpha: f64,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let p = prob.num_blocks();
    let mut z_tilde = state.z_tilde.clone();
    let mut adj_tilde = state.adj_tilde.clone();
    z_tilde[p - 1] = pred.z[p - 1].clone();
    adj_tilde[p - 1] = pred.adj[p - 1].clone();
    // Σ_{j>i} 𝒜_j*(z̃_j^{k+1} − z̃_jᵏ)
    let mut tail = &pred.adj[p - 1] - &state.adj_tilde[p - 1];
    for i in (1..p - 1).rev() {
        let block = &prob.blocks()[i];
        let einv = block.einv().expect("middle block inverse checked at setup");
        let coupling = einv.apply(&block.map().apply(&tail));
        let zi = &state.z_tilde[i] + (&pred.z[i] - &state.z_tilde[i]) * alpha - coupling;
        let ai = block.map().apply_adjoint(&zi);
        tail += &ai - &state.adj_tilde[i];
        z_tilde[i] = zi;
        adj_tilde[i] = ai;
    }
    z_tilde[0] = pred.z[0].clone();
    adj_tilde[0] = pred.adj[0].clone();
    (z_tilde, adj_tilde)
}

/// Optimality measure of `(z, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KktReport {
    /// `max(maxᵢ ‖z_i − prox_{θ_i}(z_i − 𝒜_i x)‖, ‖F(z)‖)`.
    pub value: f64,
    /// Blocks without a prox oracle, whose stationarity term was skipped.
    pub skipped: Vec<usize>,
}

/// Prox-based residual of the KKT system with unit prox parameter.
pub fn kkt_residual(prob: &MultiBlockProblem, z: &[DVector<f64>], x: &DVector<f64>) -> Result<KktReport> {
    let mut value = prob.constraint_residual(z).norm();
    let mut skipped = Vec::new();
    for (i, (block, zi)) in prob.blocks().iter().zip(z).enumerate() {
        match block.prox() {
            Some(prox) => {
                let point = zi - block.map().apply(x);
                let u = prox.prox(&point, 1.0)?;
                value = value.max((zi - u).norm());
            }
            None => skipped.push(i),
        }
    }
    Ok(KktReport { value, skipped })
}

/// When [`solve`] stops before `max_iters`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoppingRule {
    /// `max(‖F‖/(1+‖c‖), kkt_residual) < tol`.
    KktResidual,
    /// `‖F‖/(1+‖c‖) < tol`.
    Feasibility,
    /// Never stop early.
    Never,
}

/// Per-iteration diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    /// Iteration index `k` of the step just taken.
    pub k: usize,
    pub delta: f64,
    pub tau: f64,
    pub f_full_norm: f64,
    pub f_pred_norm: f64,
    /// `maxᵢ≥2 ‖z_i^{k+1} − z̃_iᵏ‖`.
    pub prediction_gap: f64,
    /// `‖x^{k+1} − xᵏ‖`.
    pub multiplier_change: f64,
}

/// Outcome of [`solve`] or [`solve_direct_extended`].
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub iterations: usize,
    pub state: IterateState,
    /// `τ_k` per iteration when `record_history` is set.
    pub tau_history: Vec<f64>,
    /// `‖F(z)‖/(1+‖c‖)` at the final iterate.
    pub feasibility: f64,
    pub kkt: KktReport,
    pub elapsed_secs: f64,
    /// Mean of `maxᵢ≥2 ‖z_i^{k+1} − z̃_iᵏ‖` over the last iterations.
    pub tail_prediction_gap: f64,
    /// Mean of `‖x^{k+1} − xᵏ‖` over the last iterations.
    pub tail_multiplier_change: f64,
}

/// Stateful driver for the corrected semi-proximal ADMM.
pub struct CorrectedAdmm<'a> {
    prob: &'a MultiBlockProblem,
    cfg: SolverConfig,
    state: IterateState,
}

impl<'a> CorrectedAdmm<'a> {
    pub fn new(prob: &'a MultiBlockProblem, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let state = IterateState::zeros(prob, &cfg);
        Ok(CorrectedAdmm { prob, cfg, state })
    }

    pub fn with_state(prob: &'a MultiBlockProblem, cfg: SolverConfig, state: IterateState) -> Result<Self> {
        cfg.validate()?;
        Ok(CorrectedAdmm { prob, cfg, state })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut IterateState {
        &mut self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        self.cfg.sigma = sigma;
    }

    /// One prediction–correction iteration.
    pub fn step(&mut self) -> Result<StepInfo> {
        let cfg = &self.cfg;
        let st = &self.state;
        let pred = predict(st, self.prob, cfg)?;
        let p = self.prob.num_blocks();
        let f_full_sq = pred.f_full.norm_squared();
        let f_pred_sq = pred.f_pred.norm_squared();
        let last_change_sq = (&pred.adj[p - 1] - &st.adj_tilde[p - 1]).norm_squared();
        let delta = compute_delta(f_pred_sq, f_full_sq, last_change_sq, cfg.eps);
        let tau = if st.k == 0 { cfg.tau0 } else { update_tau(st.tau, delta, cfg.tau_bar) };
        let x = update_multiplier(&st.x, tau, cfg.sigma, &pred.f_full);
        let (z_tilde, adj_tilde) = correct(self.prob, st, &pred, cfg.alpha);

        let prediction_gap = (1..p).map(|i| (&pred.z[i] - &st.z_tilde[i]).norm()).fold(0.0, f64::max);
        let multiplier_change = (&x - &st.x).norm();
        let info = StepInfo {
            k: st.k,
            delta,
            tau,
            f_full_norm: f_full_sq.sqrt(),
            f_pred_norm: f_pred_sq.sqrt(),
            prediction_gap,
            multiplier_change,
        };
        self.state = IterateState { z: pred.z, z_tilde, x, tau, k: st.k + 1, adj_tilde };
        Ok(info)
    }

    pub fn into_state(self) -> IterateState {
        self.state
    }
}

/// Stateful driver for the directly extended multi-block ADMM with a fixed
/// step τ. Proximal centers (for blocks with `𝒯 ≠ 0`) are the previous
/// iterate and no correction is applied.
pub struct DirectExtendedAdmm<'a> {
    prob: &'a MultiBlockProblem,
    cfg: SolverConfig,
    tau: f64,
    state: IterateState,
}

impl<'a> DirectExtendedAdmm<'a> {
    pub fn new(prob: &'a MultiBlockProblem, cfg: SolverConfig, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidConfig("fixed step must be positive".into()));
        }
        if !(cfg.sigma > 0.0) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        let mut state = IterateState::zeros(prob, &cfg);
        state.tau = tau;
        Ok(DirectExtendedAdmm { prob, cfg, tau, state })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn step(&mut self) -> Result<StepInfo> {
        let st = &self.state;
        let pred = predict(st, self.prob, &self.cfg)?;
        let x = update_multiplier(&st.x, self.tau, self.cfg.sigma, &pred.f_full);
        let p = self.prob.num_blocks();
        let prediction_gap = (1..p).map(|i| (&pred.z[i] - &st.z[i]).norm()).fold(0.0, f64::max);
        let info = StepInfo {
            k: st.k,
            delta: f64::NAN,
            tau: self.tau,
            f_full_norm: pred.f_full.norm(),
            f_pred_norm: pred.f_pred.norm(),
            prediction_gap,
            multiplier_change: (&x - &st.x).norm(),
        };
        self.state = IterateState {
            z_tilde: pred.z.clone(),
            z: pred.z,
            x,
            tau: self.tau,
            k: st.k + 1,
            adj_tilde: pred.adj,
        };
        Ok(info)
    }
}


trait Stepper {
    fn step(&mut self) -> Result<StepInfo>;
    fn current(&self) -> &IterateState;
}

impl Stepper for CorrectedAdmm<'_> {
    fn step(&mut self) -> Result<StepInfo> {
        CorrectedAdmm::step(self)
    }
    fn current(&self) -> &IterateState {
        &self.state
    }
}

impl Stepper for DirectExtendedAdmm<'_> {
    fn step(&mut self) -> Result<StepInfo> {
        DirectExtendedAdmm::step(self)
    }
    fn current(&self) -> &IterateState {
        &self.state
    }
}

fn stop_measure(prob: &MultiBlockProblem, state: &IterateState, rule: StoppingRule) -> Result<(f64, KktReport, f64)> {
    let feas = prob.constraint_residual(&state.z).norm() / (1.0 + prob.c().norm());
    let kkt = kkt_residual(prob, &state.z, &state.x)?;
    let measure = match rule {
        StoppingRule::KktResidual => feas.max(kkt.value),
        StoppingRule::Feasibility => feas,
        StoppingRule::Never => f64::INFINITY,
    };
    Ok((feas, kkt, measure))
}

fn run<S: Stepper>(
    mut solver: S,
    prob: &MultiBlockProblem,
    cfg: &SolverConfig,
    stop: StoppingRule,
) -> Result<SolveResult> {
    let start = Instant::now();
    let mut tau_history = Vec::new();
    let mut gaps: VecDeque<(f64, f64)> = VecDeque::with_capacity(TAIL_WINDOW);
    let (mut feas, mut kkt, mut measure) = stop_measure(prob, solver.current(), stop)?;
    let mut status = SolveStatus::MaxIters;
    if measure < cfg.tol {
        status = SolveStatus::Converged;
    }
    let mut iterations = 0;
    while status != SolveStatus::Converged && iterations < cfg.max_iters {
        let info = solver.step()?;
        iterations += 1;
        if cfg.record_history {
            tau_history.push(info.tau);
        }
        if gaps.len() == TAIL_WINDOW {
            gaps.pop_front();
        }
        gaps.push_back((info.prediction_gap, info.multiplier_change));
        let state = solver.current();
        if !state.is_finite() {
            return Err(Error::NonFiniteIterate {
                iteration: iterations,
                detail: format!("‖F‖ = {:e}, τ = {}", info.f_full_norm, info.tau),
            });
        }
        if state.max_norm() > DIVERGENCE_NORM {
            status = SolveStatus::Diverged;
            break;
        }
        (feas, kkt, measure) = stop_measure(prob, state, stop)?;
        if measure < cfg.tol {
            status = SolveStatus::Converged;
        }
    }
    let n = gaps.len().max(1) as f64;
    let (gap_sum, mult_sum) = gaps.iter().fold((0.0, 0.0), |(a, b), &(g, m)| (a + g, b + m));
    Ok(SolveResult {
        status,
        iterations,
        state: solver.current().clone(),
        tau_history,
        feasibility: feas,
        kkt,
        elapsed_secs: start.elapsed().as_secs_f64(),
        tail_prediction_gap: gap_sum / n,
        tail_multiplier_change: mult_sum / n,
    })
}

/// Runs the corrected semi-proximal ADMM from the zero start.
pub fn solve(prob: &MultiBlockProblem, cfg: &SolverConfig, stop: StoppingRule) -> Result<SolveResult> {
    run(CorrectedAdmm::new(prob, cfg.clone())?, prob, cfg, stop)
}

/// Runs the directly extended ADMM with fixed step `tau` from the zero
/// start. Divergent runs end with [`SolveStatus::Diverged`].
pub fn solve_direct_extended(
    prob: &MultiBlockProblem,
    cfg: &SolverConfig,
    tau: f64,
    stop: StoppingRule,
) -> Result<SolveResult> {
    run(DirectExtendedAdmm::new(prob, cfg.clone(), tau)?, prob, cfg, stop)
}
