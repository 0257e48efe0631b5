//! Penalty balancing and restarts.

use serde::{Deserialize, Serialize};

use super::{DnnSdpIterate, ResidualReport};

/// Schedule for adjusting σ and restarting the corrected iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningPolicy {
    pub sigma_tuning: bool,
    pub check_period: usize,
    pub balance_ratio: f64,
    pub sigma_factor: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// σ stays fixed from this iteration on; `None` means `0.75·max_iters`.
    pub freeze_after: Option<usize>,
    pub restarts: bool,
    pub restart_stall_window: usize,
    /// Minimum relative decrease of η over the window.
    pub restart_decrease_threshold: f64,
}

impl Default for TuningPolicy {
    fn default() -> Self {
        TuningPolicy {
            sigma_tuning: true,
            check_period: 50,
            balance_ratio: 5.0,
            sigma_factor: 1.5,
            sigma_min: 1e-4,
            sigma_max: 1e4,
            freeze_after: None,
            restarts: true,
            restart_stall_window: 100,
            restart_decrease_threshold: 0.01,
        }
    }
}

impl TuningPolicy {
    /// Fixed σ, no restarts.
    pub fn fixed() -> Self {
        TuningPolicy { sigma_tuning: false, restarts: false, ..Self::default() }
    }

    /// Iteration from which σ is frozen, given the iteration budget.
    pub fn freeze_at(&self, max_iters: usize) -> usize {
        self.freeze_after.unwrap_or(max_iters * 3 / 4)
    }
}

/// Balances primal against dual infeasibility every `check_period`
/// iterations while `k < freeze`.
///
/// `η_P` tracks `σ‖S⁺ − S̃‖` and `η_D` tracks `‖X⁺ − X‖/σ`, so a dominant
/// primal residual calls for a smaller σ and a dominant dual residual for a
/// larger one.
pub fn tune_sigma(report: &ResidualReport, sigma: f64, k: usize, freeze: usize, policy: &TuningPolicy) -> f64 {
    if !policy.sigma_tuning || k >= freeze || policy.check_period == 0 || k % policy.check_period != 0 {
        return sigma;
    }
    let rho = report.primal_infeasibility() / report.dual_infeasibility().max(1e-16);
    if rho > policy.balance_ratio {
        (sigma / policy.sigma_factor).max(policy.sigma_min)
    } else if rho < 1.0 / policy.balance_ratio {
        (sigma * policy.sigma_factor).min(policy.sigma_max)
    } else {
        sigma
    }
}

/// Restarts when η has not dropped by the relative threshold over the last
/// `restart_stall_window` entries of `history` (η values since the previous
/// restart). A restart overwrites every tilde variable with its value and
/// resets τ to `tau0`. Returns whether a restart happened.
pub fn maybe_restart(history: &[f64], it: &mut DnnSdpIterate, policy: &TuningPolicy, tau0: f64) -> bool {
    let w = policy.restart_stall_window;
    if !policy.restarts || w == 0 || history.len() <= w {
        return false;
    }
    let now = history[history.len() - 1];
    let then = history[history.len() - 1 - w];
    if now < (1.0 - policy.restart_decrease_threshold) * then {
        return false;
    }
    it.sync_tilde();
    it.tau = tau0;
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(primal: f64, dual: f64) -> ResidualReport {
        ResidualReport {
            eta_p: primal,
            eta_d: dual,
            eta_s: 0.0,
            eta_k: 0.0,
            eta_s_star: 0.0,
            eta_k_star: 0.0,
            eta_c1: 0.0,
            eta_c2: 0.0,
            eta_i: None,
            eta_i_star: None,
            eta: primal.max(dual),
            eta_g: 0.0,
            primal_objective: 0.0,
            dual_objective: 0.0,
        }
    }

    #[test]
    fn balanced_residuals_keep_sigma() {
        let p = TuningPolicy::default();
        assert_eq!(tune_sigma(&report(1e-3, 1e-3), 2.0, 50, 1000, &p), 2.0);
    }

    #[test]
    fn unbalanced_residuals_scale_sigma_by_factor() {
        let p = TuningPolicy::default();
        assert_eq!(tune_sigma(&report(1e-2, 1e-4), 3.0, 100, 1000, &p), 2.0);
        assert_eq!(tune_sigma(&report(1e-4, 1e-2), 2.0, 100, 1000, &p), 3.0);
    }

    #[test]
    fn frozen_and_off_period_keep_sigma() {
        let p = TuningPolicy::default();
        assert_eq!(tune_sigma(&report(1.0, 1e-9), 2.0, 1000, 1000, &p), 2.0);
        assert_eq!(tune_sigma(&report(1.0, 1e-9), 2.0, 51, 1000, &p), 2.0);
        assert_eq!(tune_sigma(&report(1.0, 1e-9), 2.0, 50, 1000, &TuningPolicy::fixed()), 2.0);
    }

    #[test]
    fn sigma_stays_within_bounds() {
        let p = TuningPolicy::default();
        assert_eq!(tune_sigma(&report(1.0, 1e-12), 1.2e-4, 50, 1000, &p), 1e-4);
        assert_eq!(tune_sigma(&report(1e-12, 1.0), 9e3, 50, 1000, &p), 1e4);
    }
}
