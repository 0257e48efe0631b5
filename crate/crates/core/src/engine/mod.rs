//! Generic p-block corrected semi-proximal ADMM.
//!
//! Solves `min Σ θ_i(z_i)  s.t.  Σ 𝒜_i* z_i = c` by a Gauss–Seidel
//! semi-proximal sweep (prediction) with an adaptive multiplier step
//! followed by a triangular correction of the middle blocks. The directly
//! extended multi-block ADMM is provided as a baseline.

mod blocks;
mod solver;
mod theory;


use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cones::ProxOracle;
use crate::error::{Error, Result};
use crate::linalg::LinearBlockMap;

pub use blocks::{DenseEInverse, IdentityProxSubsolver, ProxCollapseSubsolver, QuadraticBlock, QuadraticExactSubsolver};
pub use solver::{
    compute_delta, correct, kkt_residual, predict, solve, solve_direct_extended, update_multiplier, update_tau,
    CorrectedAdmm, DirectExtendedAdmm, KktReport, Prediction, SolveResult, StepInfo, StoppingRule,
};
pub use theory::{build_theory_operators, semiprox_matrix, TheoryOperators, MAX_THEORY_DIM};

/// Semi-proximal operator `𝒯_i` attached to a block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SemiProx {
    /// `𝒯_i = 0`; requires `𝒜_i𝒜_i*` positive definite.
    Zero,
    /// `𝒯_i = ϱ_i ℐ − 𝒜_i𝒜_i*` with `ϱ_i ≥ λ_max(𝒜_i𝒜_i*)`.
    ScaledIdentityCollapse(f64),
}

/// Data handed to a block subproblem solver.
///
/// The subproblem is
/// `argmin_z θ(z) + ⟨x, 𝒜*z⟩ + (σ/2)‖𝒜*z + r‖² + (σ/2)‖z − center‖²_𝒯`.
#[derive(Clone, Copy, Debug)]
pub struct SubproblemInput<'a> {
    pub multiplier: &'a DVector<f64>,
    pub partial_residual: &'a DVector<f64>,
    pub center: &'a DVector<f64>,
    pub sigma: f64,
}

/// Oracle returning the minimizer of one block subproblem.
pub trait Subsolver: Send + Sync {
    fn solve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String>;
}

/// Applies `(𝒯_i + 𝒜_i𝒜_i*)⁻¹`.
pub trait BlockInverse: Send + Sync {
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl<F> BlockInverse for F
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self(v)
    }
}

/// One block of a [`MultiBlockProblem`].
#[derive(Clone)]
pub struct BlockSpec {
    map: Arc<dyn LinearBlockMap>,
    semiprox: SemiProx,
    subsolver: Arc<dyn Subsolver>,
    prox: Option<Arc<dyn ProxOracle>>,
    einv: Option<Arc<dyn BlockInverse>>,
}

impl BlockSpec {
    /// Block with `𝒯 = 0` and an exact subproblem solver.
    pub fn exact(map: Arc<dyn LinearBlockMap>, subsolver: Arc<dyn Subsolver>) -> Self {
        BlockSpec { map, semiprox: SemiProx::Zero, subsolver, prox: None, einv: None }
    }

    /// Block with `𝒯 = ϱℐ − 𝒜𝒜*`, whose subproblem collapses to one prox
    /// evaluation of `θ`.
    pub fn collapsed(map: Arc<dyn LinearBlockMap>, prox: Arc<dyn ProxOracle>, rho: f64) -> Self {
        let subsolver = Arc::new(ProxCollapseSubsolver::new(map.clone(), prox.clone(), rho));
        BlockSpec {
            map,
            semiprox: SemiProx::ScaledIdentityCollapse(rho),
            subsolver,
            prox: Some(prox),
            einv: Some(Arc::new(move |v: &DVector<f64>| v / rho)),
        }
    }

    /// Attaches the prox of `θ_i` used by [`kkt_residual`].
    pub fn with_prox(mut self, prox: Arc<dyn ProxOracle>) -> Self {
        self.prox = Some(prox);
        self
    }

    /// Attaches `(𝒯_i + 𝒜_i𝒜_i*)⁻¹`, needed for blocks `2..p−1`.
    pub fn with_einv(mut self, einv: Arc<dyn BlockInverse>) -> Self {
        self.einv = Some(einv);
        self
    }

    pub fn map(&self) -> &dyn LinearBlockMap {
        self.map.as_ref()
    }

    pub fn semiprox(&self) -> SemiProx {
        self.semiprox
    }

    pub fn prox(&self) -> Option<&dyn ProxOracle> {
        self.prox.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.map.block_dim()
    }

    pub(crate) fn subsolve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String> {
        self.subsolver.solve(input)
    }

    pub(crate) fn einv(&self) -> Option<&dyn BlockInverse> {
        self.einv.as_deref()
    }
}

impl std::fmt::Debug for BlockSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockSpec")
            .field("dim", &self.map.block_dim())
            .field("semiprox", &self.semiprox)
            .field("has_prox", &self.prox.is_some())
            .field("has_einv", &self.einv.is_some())
            .finish()
    }
}

/// `min Σ θ_i(z_i)  s.t.  Σ 𝒜_i* z_i = c`.
#[derive(Clone, Debug)]
pub struct MultiBlockProblem {
    blocks: Vec<BlockSpec>,
    c: DVector<f64>,
}

/// Largest `𝒜𝒜*` the setup probe densifies when checking definiteness.
const PROBE_MAX_DIM: usize = 500;

impl MultiBlockProblem {
    /// Validates block dimensions, middle-block inverses and, for small
    /// `𝒯 = 0` blocks that need an inverse, definiteness of `𝒜_i𝒜_i*`.
    pub fn new(blocks: Vec<BlockSpec>, c: DVector<f64>) -> Result<Self> {
        let p = blocks.len();
        if p < 2 {
            return Err(Error::InvalidProblem(format!("need at least 2 blocks, got {p}")));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.map.space_dim() != c.len() {
                return Err(Error::Dimension(format!(
                    "block {i} maps into a space of dimension {}, but c has length {}",
                    b.map.space_dim(),
                    c.len()
                )));
            }
            if let SemiProx::ScaledIdentityCollapse(rho) = b.semiprox {
                if !(rho > 0.0) {
                    return Err(Error::InvalidProblem(format!("block {i}: collapse constant must be positive")));
                }
            }
            let middle = i > 0 && i + 1 < p;
            if middle && b.einv.is_none() {
                return Err(Error::InvalidProblem(format!(
                    "block {i} is a middle block and needs (𝒯 + 𝒜𝒜*)⁻¹"
                )));
            }
            if middle && b.semiprox == SemiProx::Zero && b.dim() <= PROBE_MAX_DIM {
                let a = theory::densify(b.map.as_ref());
                let gram = &a * a.transpose();
                let lmin = nalgebra::SymmetricEigen::new(gram).eigenvalues.min();
                if !(lmin > 1e-12) {
                    return Err(Error::InvalidProblem(format!(
                        "block {i}: 𝒜𝒜* is not positive definite (λ_min = {lmin:e}) and 𝒯 = 0"
                    )));
                }
            }
        }
        Ok(MultiBlockProblem { blocks, c })
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// `F(z) = Σ 𝒜_i* z_i − c`.
    pub fn constraint_residual(&self, z: &[DVector<f64>]) -> DVector<f64> {
        let mut f = -self.c.clone();
        for (b, zi) in self.blocks.iter().zip(z) {
            f += b.map.apply_adjoint(zi);
        }
        f
    }
}

/// Parameters of the corrected semi-proximal ADMM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Penalty parameter σ.
    pub sigma: f64,
    /// Correction step α ∈ (0, 1).
    pub alpha: f64,
    /// Step-size floor τ̄ ∈ (0, 1).
    pub tau_bar: f64,
    /// Safeguard ε ∈ (0, 1/2).
    pub eps: f64,
    /// Initial step τ₀ ∈ (1, 2).
    pub tau0: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sigma: 1.0,
            alpha: 0.999,
            tau_bar: 0.1,
            eps: 0.1,
            tau0: 1.95,
            tol: 1e-6,
            max_iters: 20_000,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.tau_bar > 0.0 && self.tau_bar < 1.0) {
            return bad("tau_bar must lie in (0, 1)");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad("eps must lie in (0, 1/2)");
        }
        if !(self.tau0 > 1.0 && self.tau0 < 2.0) {
            return bad("tau0 must lie in (1, 2)");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}

/// Iterate of the corrected ADMM: prediction values `z`, corrected values
/// `z̃`, multiplier `x`, current step τ and iteration counter.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub z: Vec<DVector<f64>>,
    pub z_tilde: Vec<DVector<f64>>,
    pub x: DVector<f64>,
    pub tau: f64,
    pub k: usize,
    /// `𝒜_i* z̃_i` for every block.
    pub(crate) adj_tilde: Vec<DVector<f64>>,
}

impl IterateState {
    /// All-zero start with `τ = τ₀`.
    pub fn zeros(prob: &MultiBlockProblem, cfg: &SolverConfig) -> Self {
        let z: Vec<_> = prob.blocks.iter().map(|b| DVector::zeros(b.dim())).collect();
        Self::new(prob, z, DVector::zeros(prob.c.len()), cfg.tau0)
    }

    /// Starts from `(z⁰, x⁰)` with `z̃⁰ = z⁰`.
    pub fn new(prob: &MultiBlockProblem, z: Vec<DVector<f64>>, x: DVector<f64>, tau0: f64) -> Self {
        assert_eq!(z.len(), prob.num_blocks(), "one starting value per block");
        let adj_tilde = prob.blocks.iter().zip(&z).map(|(b, zi)| b.map.apply_adjoint(zi)).collect();
        IterateState { z_tilde: z.clone(), z, x, tau: tau0, k: 0, adj_tilde }
    }

    /// Overwrites every corrected value with its prediction value.
    pub fn sync_tilde(&mut self, prob: &MultiBlockProblem) {
        self.z_tilde = self.z.clone();
        self.adj_tilde = prob.blocks.iter().zip(&self.z).map(|(b, zi)| b.map.apply_adjoint(zi)).collect();
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().chain(&self.z_tilde).chain(std::iter::once(&self.x)).all(|v| v.iter().all(|e| e.is_finite()))
    }

    pub fn max_norm(&self) -> f64 {
        self.z.iter().chain(&self.z_tilde).chain(std::iter::once(&self.x)).map(|v| v.norm()).fold(0.0, f64::max)
    }
}
