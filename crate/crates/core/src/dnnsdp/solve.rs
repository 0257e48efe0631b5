use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::policy::{maybe_restart, tune_sigma, TuningPolicy};
use super::residuals::{residuals, ResidualReport};
use super::step::{cadmm_step, dext_step, DnnStepInfo};
use super::{DnnSdpIterate, DnnSdpProblem};
use crate::engine::SolverConfig;
use crate::error::{Error, Result};
use crate::SolveStatus;

/// Iterate norm beyond which a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Fixed step of the directly extended baseline.
pub const DEFAULT_DEXT_TAU: f64 = 1.618;

/// Default configuration: 20000 iterations for 3-block problems and 40000
/// for 4-block problems.
pub fn default_config(prob: &DnnSdpProblem) -> SolverConfig {
    SolverConfig { max_iters: if prob.num_blocks() == 4 { 40_000 } else { 20_000 }, ..SolverConfig::default() }
}

/// Outcome of [`cadmm_solve`] or [`dext_solve`].
#[derive(Clone, Debug)]
pub struct DnnSolveResult {
    pub status: SolveStatus,
    pub iterations: usize,
    pub report: ResidualReport,
    /// `sign·⟨C, X⟩ + offset` for the problem's objective map.
    pub objective: f64,
    pub tau: f64,
    pub sigma: f64,
    pub elapsed_secs: f64,
    /// Iterations after which a restart happened.
    pub restarts: Vec<usize>,
    /// Per-iteration τ, η and σ, filled when `record_history` is set.
    pub history: History,
    pub iterate: DnnSdpIterate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma: Vec<f64>,
}

enum Variant {
    Corrected,
    Direct(f64),
}

/// Runs the corrected method from the zero start until `η < tol` or
/// `max_iters`.
pub fn cadmm_solve(prob: &DnnSdpProblem, cfg: &SolverConfig, policy: &TuningPolicy) -> Result<DnnSolveResult> {
    cfg.validate()?;
    run(prob, cfg, policy, Variant::Corrected, &mut |_| {})
}

/// [`cadmm_solve`] calling `observer` on every iterate after its step.
pub fn cadmm_solve_observed(
    prob: &DnnSdpProblem,
    cfg: &SolverConfig,
    policy: &TuningPolicy,
    observer: &mut dyn FnMut(&DnnSdpIterate),
) -> Result<DnnSolveResult> {
    cfg.validate()?;
    run(prob, cfg, policy, Variant::Corrected, observer)
}

/// Runs the directly extended method with fixed step `tau` under the same
/// σ and restart policy.
pub fn dext_solve(prob: &DnnSdpProblem, cfg: &SolverConfig, policy: &TuningPolicy, tau: f64) -> Result<DnnSolveResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig("fixed step must be positive".into()));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) || !(cfg.tol > 0.0) {
        return Err(Error::InvalidConfig("sigma and tol must be positive".into()));
    }
    run(prob, cfg, policy, Variant::Direct(tau), &mut |_| {})
}

fn run(
    prob: &DnnSdpProblem,
    cfg: &SolverConfig,
    policy: &TuningPolicy,
    variant: Variant,
    observer: &mut dyn FnMut(&DnnSdpIterate),
) -> Result<DnnSolveResult> {
    let start = Instant::now();
    let tau_start = match variant {
        Variant::Corrected => cfg.tau0,
        Variant::Direct(t) => t,
    };
    let freeze = policy.freeze_at(cfg.max_iters);
    let mut it = DnnSdpIterate::zeros(prob, cfg.sigma, tau_start);
    let mut report = residuals(&it, prob);
    let mut history = History::default();
    let mut since_restart: Vec<f64> = Vec::new();
    let mut restarts = Vec::new();
    let mut status = if report.eta < cfg.tol { SolveStatus::Converged } else { SolveStatus::MaxIters };
    let mut iterations = 0;

    while status != SolveStatus::Converged && iterations < cfg.max_iters {
        let (next, info): (DnnSdpIterate, DnnStepInfo) = match variant {
            Variant::Corrected => cadmm_step(&it, prob, cfg)?,
            Variant::Direct(t) => dext_step(&it, prob, t)?,
        };
        iterations += 1;
        it = next;
        observer(&it);
        if !it.is_finite() {
            return Err(Error::NonFiniteIterate {
                iteration: iterations,
                detail: format!(
                    "σ = {:e}, τ = {}, ‖F‖ = {:e}, last η = {:e}",
                    it.sigma, info.tau, info.f_full_norm, report.eta
                ),
            });
        }
        if it.max_norm() > DIVERGENCE_NORM {
            report = residuals(&it, prob);
            status = SolveStatus::Diverged;
            break;
        }
        report = residuals(&it, prob);
        if cfg.record_history {
            history.tau.push(info.tau);
            history.eta.push(report.eta);
            history.sigma.push(it.sigma);
        }
        if report.eta < cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        it.sigma = tune_sigma(&report, it.sigma, iterations, freeze, policy);
        since_restart.push(report.eta);
        if let Variant::Corrected = variant {
            if maybe_restart(&since_restart, &mut it, policy, cfg.tau0) {
                log::debug!("restart after iteration {iterations} (η = {:e})", report.eta);
                restarts.push(iterations);
                since_restart.clear();
            }
        }
    }
    Ok(DnnSolveResult {
        status,
        iterations,
        objective: prob.objective().apply(report.primal_objective),
        report,
        tau: it.tau,
        sigma: it.sigma,
        elapsed_secs: start.elapsed().as_secs_f64(),
        restarts,
        history,
        iterate: it,
    })
}
