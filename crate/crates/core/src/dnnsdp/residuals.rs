//! Relative KKT residuals and the duality gap.

use serde::{Deserialize, Serialize};

use super::{DnnSdpIterate, DnnSdpProblem};
use crate::cones::{project_pattern, project_pattern_dual};
use crate::linalg::SymMat;

/// Relative residuals of a primal–dual tuple. `eta_i` and `eta_i_star` are
/// present only for problems with inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eta_p: f64,
    pub eta_d: f64,
    pub eta_s: f64,
    pub eta_k: f64,
    pub eta_s_star: f64,
    pub eta_k_star: f64,
    pub eta_c1: f64,
    pub eta_c2: f64,
    pub eta_i: Option<f64>,
    pub eta_i_star: Option<f64>,
    /// Max of the components above.
    pub eta: f64,
    /// Signed relative gap.
    pub eta_g: f64,
    /// `⟨C, X⟩`
    pub primal_objective: f64,
    /// `⟨b_E, y_E⟩ + ⟨b_I, y_I⟩ + ⟨M, Z⟩`
    pub dual_objective: f64,
}

impl ResidualReport {
    /// `max(η_P, η_S, η_𝒦)`
    pub fn primal_infeasibility(&self) -> f64 {
        self.eta_p.max(self.eta_s).max(self.eta_k)
    }

    /// `max(η_D, η_S*, η_𝒦*)`
    pub fn dual_infeasibility(&self) -> f64 {
        self.eta_d.max(self.eta_s_star).max(self.eta_k_star)
    }

    /// Named components in a fixed order.
    pub fn components(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("eta_p", self.eta_p),
            ("eta_d", self.eta_d),
            ("eta_s", self.eta_s),
            ("eta_k", self.eta_k),
            ("eta_s_star", self.eta_s_star),
            ("eta_k_star", self.eta_k_star),
            ("eta_c1", self.eta_c1),
            ("eta_c2", self.eta_c2),
        ];
        if let Some(e) = self.eta_i {
            v.push(("eta_i", e));
        }
        if let Some(e) = self.eta_i_star {
            v.push(("eta_i_star", e));
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|(_, v)| v.is_finite()) && self.eta_g.is_finite()
    }
}

/// `‖Π₊(−A)‖`, the norm of the negative part of the spectrum.
fn neg_spectral_norm(a: &SymMat) -> f64 {
    if !a.is_finite() {
        return f64::NAN;
    }
    a.as_matrix().clone().symmetric_eigenvalues().iter().filter(|&&l| l < 0.0).fold(0.0, |acc, l| acc + l * l).sqrt()
}

/// Residuals of `(X, y_I, Z, y_E, S)` taken from the iterate's current
/// (non-tilde) values.
pub fn residuals(it: &DnnSdpIterate, prob: &DnnSdpProblem) -> ResidualReport {
    let x = &it.x;
    let nx = x.norm();

    let eta_p = (prob.a_e().apply(x) - prob.b_e()).norm() / (1.0 + prob.b_e().norm());

    let mut dual = prob.adj_i(it.y_i.as_ref());
    dual += &it.z;
    prob.a_e().adjoint_add(1.0, &it.y_e, &mut dual);
    dual += &it.s;
    dual -= prob.c();
    let eta_d = dual.norm() / (1.0 + prob.c().norm());

    let eta_s = neg_spectral_norm(x) / (1.0 + nx);
    let xm = x - prob.shift();
    let eta_k = (&xm - &project_pattern(&xm, prob.pattern())).norm() / (1.0 + nx);
    let eta_s_star = neg_spectral_norm(&it.s) / (1.0 + it.s.norm());
    let eta_k_star = (&it.z - &project_pattern_dual(&it.z, prob.pattern())).norm() / (1.0 + it.z.norm());
    let eta_c1 = x.dot(&it.s).abs() / (1.0 + nx + it.s.norm());
    let eta_c2 = xm.dot(&it.z).abs() / (1.0 + nx + it.z.norm());

    let (eta_i, eta_i_star, ineq_dual) = match (prob.ineq(), &it.y_i) {
        (Some(q), Some(y)) => {
            let viol = (&q.b - q.a.apply(x)).map(|v| v.max(0.0));
            let neg_y = y.map(|v| (-v).max(0.0));
            (
                Some(viol.norm() / (1.0 + q.b.norm())),
                Some(neg_y.norm() / (1.0 + y.norm())),
                q.b.dot(y),
            )
        }
        _ => (None, None, 0.0),
    };

    let mut eta = [eta_p, eta_d, eta_s, eta_k, eta_s_star, eta_k_star, eta_c1, eta_c2]
        .into_iter()
        .fold(0.0, f64::max);
    for e in [eta_i, eta_i_star].into_iter().flatten() {
        eta = eta.max(e);
    }
    // Propagate NaN rather than letting `max` swallow it.
    if [eta_p, eta_d, eta_s, eta_k, eta_s_star, eta_k_star, eta_c1, eta_c2].iter().any(|v| v.is_nan()) {
        eta = f64::NAN;
    }

    let primal_objective = prob.c().dot(x);
    let dual_objective = prob.b_e().dot(&it.y_e) + ineq_dual + prob.shift().dot(&it.z);
    let eta_g = (primal_objective - dual_objective) / (1.0 + (primal_objective + dual_objective).abs());

    ResidualReport {
        eta_p,
        eta_d,
        eta_s,
        eta_k,
        eta_s_star,
        eta_k_star,
        eta_c1,
        eta_c2,
        eta_i,
        eta_i_star,
        eta,
        eta_g,
        primal_objective,
        dual_objective,
    }
}
