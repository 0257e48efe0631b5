//! Closed-form block updates.
//!
//! Each update receives the partial residual `r`, the sum of the other
//! three blocks' contributions to `𝒜_I*y_I + Z + 𝒜_E*y_E + S − C`, and
//! minimizes `θ(·) + ⟨X, ·⟩ + (σ/2)‖· + r‖²` over its own block.

use nalgebra::DVector;

use super::DnnSdpProblem;
use crate::cones::{project_nonneg, project_pattern_dual};
use crate::error::{Error, Result};
use crate::linalg::{project_psd, SymMat};

/// `y_I` update with `𝒯 = λℐ − 𝒜_I𝒜_I*`.
///
/// The proximal term cancels `‖𝒜_I*y‖²`, leaving `(σλ/2)‖y‖²` plus linear
/// terms, so the minimizer over `y ≥ 0` is
/// `max(0, ỹ − λ⁻¹𝒜_I(X/σ + r + 𝒜_I*ỹ) + b_I/(σλ))`.
pub fn update_y_i(
    prob: &DnnSdpProblem,
    y_tilde: &DVector<f64>,
    x: &SymMat,
    r: &SymMat,
    sigma: f64,
) -> Result<DVector<f64>> {
    let (q, lambda) = match (prob.ineq(), prob.lambda_i()) {
        (Some(q), Some(l)) => (q, l),
        _ => return Err(Error::InvalidProblem("y_I update on a problem without inequalities".into())),
    };
    let mut inner = x.scale(1.0 / sigma);
    inner += r;
    q.a.adjoint_add(1.0, y_tilde, &mut inner);
    let point = y_tilde - q.a.apply(&inner) / lambda + &q.b / (sigma * lambda);
    Ok(project_nonneg(&point))
}

/// `Z = Π_𝒦*((M − X)/σ − r)`.
pub fn update_z(prob: &DnnSdpProblem, x: &SymMat, r: &SymMat, sigma: f64) -> SymMat {
    let mut point = (prob.shift() - x).scale(1.0 / sigma);
    point -= r;
    project_pattern_dual(&point, prob.pattern())
}

/// Solves `(𝒜_E𝒜_E*) y = b_E/σ − 𝒜_E(X/σ + r)`.
pub fn update_y_e(prob: &DnnSdpProblem, x: &SymMat, r: &SymMat, sigma: f64) -> DVector<f64> {
    let mut inner = x.scale(1.0 / sigma);
    inner += r;
    let rhs = prob.b_e() / sigma - prob.a_e().apply(&inner);
    prob.gram_e().solve(&rhs)
}

/// `S = Π₊(−r − X/σ)`.
pub fn update_s(x: &SymMat, r: &SymMat, sigma: f64) -> Result<SymMat> {
    let mut point = -r;
    point.axpy(-1.0 / sigma, x);
    project_psd(&point)
}
