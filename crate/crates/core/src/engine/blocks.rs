use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{BlockInverse, SubproblemInput, Subsolver};
use crate::cones::ProxOracle;
use crate::error::{Error, Result};
use crate::linalg::LinearBlockMap;

/// Subsolver for a block with `𝒯 = ϱℐ − 𝒜𝒜*`.
///
/// Expanding `(σ/2)‖𝒜*z + r‖² + (σ/2)‖z − z̃‖²_𝒯` cancels the `‖𝒜*z‖²`
/// terms, leaving `(σϱ/2)‖z − z̃ + ϱ⁻¹𝒜(x/σ + r + 𝒜*z̃)‖² + const`, so the
/// minimizer is `prox_{θ, 1/(σϱ)}(z̃ − ϱ⁻¹𝒜(x/σ + r + 𝒜*z̃))`.
pub struct ProxCollapseSubsolver {
    map: Arc<dyn LinearBlockMap>,
    prox: Arc<dyn ProxOracle>,
    rho: f64,
}

impl ProxCollapseSubsolver {
    pub fn new(map: Arc<dyn LinearBlockMap>, prox: Arc<dyn ProxOracle>, rho: f64) -> Self {
        ProxCollapseSubsolver { map, prox, rho }
    }
}

impl Subsolver for ProxCollapseSubsolver {
    fn solve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String> {
        let sigma = input.sigma;
        let mut inner = input.multiplier / sigma + input.partial_residual;
        inner += self.map.apply_adjoint(input.center);
        let point = input.center - self.map.apply(&inner) / self.rho;
        self.prox.prox(&point, 1.0 / (sigma * self.rho)).map_err(|e| e.to_string())
    }
}

/// Subsolver for an identity-map block with `𝒯 = 0`:
/// `argmin θ(z) + ⟨x, z⟩ + (σ/2)‖z + r‖² = prox_{θ, 1/σ}(−r − x/σ)`.
pub struct IdentityProxSubsolver {
    prox: Arc<dyn ProxOracle>,
}

impl IdentityProxSubsolver {
    pub fn new(prox: Arc<dyn ProxOracle>) -> Self {
        IdentityProxSubsolver { prox }
    }
}

impl Subsolver for IdentityProxSubsolver {
    fn solve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String> {
        let point = -(input.partial_residual + input.multiplier / input.sigma);
        self.prox.prox(&point, 1.0 / input.sigma).map_err(|e| e.to_string())
    }
}

/// `θ(z) = ½zᵀQz + ⟨q, z⟩` with `Q` positive semidefinite.
#[derive(Clone, Debug)]
pub struct QuadraticBlock {
    pub q_mat: DMatrix<f64>,
    pub q_vec: DVector<f64>,
}

impl QuadraticBlock {
    pub fn zero(dim: usize) -> Self {
        QuadraticBlock { q_mat: DMatrix::zeros(dim, dim), q_vec: DVector::zeros(dim) }
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.q_mat * z)) + self.q_vec.dot(z)
    }
}

impl ProxOracle for QuadraticBlock {
    fn prox(&self, point: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let d = point.len();
        let lhs = DMatrix::identity(d, d) + &self.q_mat * t;
        let rhs = point - &self.q_vec * t;
        lhs.lu().solve(&rhs).ok_or_else(|| Error::Subproblem { block: usize::MAX, reason: "singular prox system".into() })
    }
}

/// Exact subsolver for a quadratic `θ` with a dense map `𝒜` (`d × m`) and
/// a dense semi-proximal matrix `𝒯`.
#[derive(Clone, Debug)]
pub struct QuadraticExactSubsolver {
    pub theta: QuadraticBlock,
    pub a: DMatrix<f64>,
    pub semiprox: DMatrix<f64>,
}

impl Subsolver for QuadraticExactSubsolver {
    fn solve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String> {
        let s = input.sigma;
        let lhs = &self.theta.q_mat + (&self.a * self.a.transpose() + &self.semiprox) * s;
        let rhs = -&self.theta.q_vec - &self.a * input.multiplier - &self.a * input.partial_residual * s
            + &self.semiprox * input.center * s;
        lhs.lu().solve(&rhs).ok_or_else(|| "singular block system".to_string())
    }
}

/// Dense `(𝒯 + 𝒜𝒜*)⁻¹` from a Cholesky factorization.
#[derive(Clone, Debug)]
pub struct DenseEInverse {
    chol: Cholesky<f64, Dyn>,
}

impl DenseEInverse {
    pub fn new(a: &DMatrix<f64>, semiprox: &DMatrix<f64>) -> Result<Self> {
        let e = a * a.transpose() + semiprox;
        let chol = Cholesky::new(e).ok_or_else(|| Error::InvalidProblem("𝒯 + 𝒜𝒜* is not positive definite".into()))?;
        Ok(DenseEInverse { chol })
    }
}

impl BlockInverse for DenseEInverse {
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }
}
