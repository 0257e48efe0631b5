//! Doubly nonnegative SDPs
//!
//! ```text
//! primal:  min ⟨C, X⟩  s.t.  𝒜_E X = b_E,  𝒜_I X ≥ b_I,  X ⪰ 0,  X − M ∈ 𝒦
//! dual:    max ⟨b_E, y_E⟩ + ⟨b_I, y_I⟩ + ⟨M, Z⟩
//!          s.t. 𝒜_I* y_I + Z + 𝒜_E* y_E + S = C,  y_I ≥ 0,  Z ∈ 𝒦*,  S ⪰ 0
//! ```
//!
//! The dual is a 4-block (or, without inequalities, 3-block) instance of the
//! generic problem and is solved with the corrected ADMM in the block order
//! `y_I → Z → y_E → S`. The primal variable `X` is the multiplier.

mod generic;
mod policy;
mod residuals;
mod solve;
mod step;
mod subproblems;


use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cones::ConePattern;
use crate::error::{Error, Result};
use crate::linalg::{lambda_max_gram, GramFactor, SparseSymList, SymMat};

pub use generic::{from_generic_state, to_generic_state, to_multiblock, GramSubsolver};
pub use policy::{maybe_restart, tune_sigma, TuningPolicy};
pub use residuals::{residuals, ResidualReport};
pub use solve::{cadmm_solve, cadmm_solve_observed, default_config, dext_solve, DnnSolveResult, History, DEFAULT_DEXT_TAU, DIVERGENCE_NORM};
pub use step::{cadmm_step, dext_step, DnnStepInfo};
pub use subproblems::{update_s, update_y_e, update_y_i, update_z};

/// Inequality data `𝒜_I X ≥ b_I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequalities {
    pub a: SparseSymList,
    pub b: DVector<f64>,
}

/// Maps the stored objective `⟨C, X⟩` to the value of the original model:
/// `sign · ⟨C, X⟩ + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveMap {
    pub sign: f64,
    pub offset: f64,
}

impl Default for ObjectiveMap {
    fn default() -> Self {
        ObjectiveMap { sign: 1.0, offset: 0.0 }
    }
}

impl ObjectiveMap {
    pub fn apply(&self, stored: f64) -> f64 {
        self.sign * stored + self.offset
    }
}

/// A DNN-SDP in the form above, with the Gram factorization of `𝒜_E` and
/// `λ_max(𝒜_I𝒜_I*)` computed once at construction.
#[derive(Clone, Debug)]
pub struct DnnSdpProblem {
    c: SymMat,
    a_e: SparseSymList,
    b_e: DVector<f64>,
    ineq: Option<Inequalities>,
    shift: SymMat,
    pattern: ConePattern,
    objective: ObjectiveMap,
    gram_e: GramFactor,
    lambda_i: Option<f64>,
}

impl DnnSdpProblem {
    /// Validates dimensions and finiteness, factors `𝒜_E𝒜_E*` (failing if
    /// `𝒜_E` is not surjective) and estimates `λ_max(𝒜_I𝒜_I*)`.
    pub fn new(
        c: SymMat,
        a_e: SparseSymList,
        b_e: DVector<f64>,
        ineq: Option<Inequalities>,
        shift: SymMat,
        pattern: ConePattern,
    ) -> Result<Self> {
        let n = c.n();
        if n == 0 {
            return Err(Error::InvalidProblem("matrix order must be at least 1".into()));
        }
        let dim = |what: &str, got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(Error::Dimension(format!("{what} has order {got}, expected {n}")))
            }
        };
        dim("A_E", a_e.n())?;
        dim("M", shift.n())?;
        dim("pattern", pattern.n())?;
        if a_e.is_empty() {
            return Err(Error::InvalidProblem("at least one equality constraint is required".into()));
        }
        if b_e.len() != a_e.len() {
            return Err(Error::Dimension(format!("b_E has length {}, expected {}", b_e.len(), a_e.len())));
        }
        if !c.is_finite() || !shift.is_finite() || !b_e.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("problem data"));
        }
        let ineq = match ineq {
            Some(q) if q.a.is_empty() => None,
            Some(q) => {
                dim("A_I", q.a.n())?;
                if q.b.len() != q.a.len() {
                    return Err(Error::Dimension(format!("b_I has length {}, expected {}", q.b.len(), q.a.len())));
                }
                if !q.b.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite("b_I"));
                }
                Some(q)
            }
            None => None,
        };
        let gram_e = GramFactor::new(&a_e)?;
        let lambda_i = match &ineq {
            Some(q) => {
                let bound = lambda_max_gram(&q.a)?;
                if !(bound.value > 0.0) {
                    return Err(Error::InvalidProblem("λ_max(𝒜_I𝒜_I*) must be positive".into()));
                }
                Some(bound.value)
            }
            None => None,
        };
        Ok(DnnSdpProblem { c, a_e, b_e, ineq, shift, pattern, objective: ObjectiveMap::default(), gram_e, lambda_i })
    }

    pub fn with_objective(mut self, objective: ObjectiveMap) -> Self {
        self.objective = objective;
        self
    }

    /// The same problem without its inequality block.
    pub fn without_inequalities(&self) -> Self {
        DnnSdpProblem { ineq: None, lambda_i: None, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn c(&self) -> &SymMat {
        &self.c
    }

    pub fn a_e(&self) -> &SparseSymList {
        &self.a_e
    }

    pub fn b_e(&self) -> &DVector<f64> {
        &self.b_e
    }

    pub fn ineq(&self) -> Option<&Inequalities> {
        self.ineq.as_ref()
    }

    pub fn shift(&self) -> &SymMat {
        &self.shift
    }

    pub fn pattern(&self) -> &ConePattern {
        &self.pattern
    }

    pub fn objective(&self) -> ObjectiveMap {
        self.objective
    }

    pub fn gram_e(&self) -> &GramFactor {
        &self.gram_e
    }

    /// Cached `λ_max(𝒜_I𝒜_I*)`, present for 4-block problems.
    pub fn lambda_i(&self) -> Option<f64> {
        self.lambda_i
    }

    pub fn m_e(&self) -> usize {
        self.a_e.len()
    }

    pub fn m_i(&self) -> usize {
        self.ineq.as_ref().map_or(0, |q| q.a.len())
    }

    pub fn num_blocks(&self) -> usize {
        if self.ineq.is_some() {
            4
        } else {
            3
        }
    }

    /// `𝒜_I* y` (zero for 3-block problems).
    pub(crate) fn adj_i(&self, y: Option<&DVector<f64>>) -> SymMat {
        match (&self.ineq, y) {
            (Some(q), Some(y)) => q.a.adjoint(y),
            _ => SymMat::zeros(self.n()),
        }
    }
}

/// Iterate of the DNN-SDP solvers.
///
/// `y_i` and `y_i_tilde` are `None` for 3-block problems. After every step
/// `s_tilde = s` and `y_i_tilde = y_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DnnSdpIterate {
    pub y_i: Option<DVector<f64>>,
    pub z: SymMat,
    pub y_e: DVector<f64>,
    pub s: SymMat,
    pub x: SymMat,
    pub y_i_tilde: Option<DVector<f64>>,
    pub z_tilde: SymMat,
    pub y_e_tilde: DVector<f64>,
    pub s_tilde: SymMat,
    pub tau: f64,
    pub sigma: f64,
    /// Number of steps taken.
    pub k: usize,
}

impl DnnSdpIterate {
    /// All-zero start, which lies in every required cone.
    pub fn zeros(prob: &DnnSdpProblem, sigma: f64, tau0: f64) -> Self {
        let n = prob.n();
        let y_i = prob.ineq().map(|q| DVector::zeros(q.a.len()));
        DnnSdpIterate {
            y_i_tilde: y_i.clone(),
            y_i,
            z: SymMat::zeros(n),
            y_e: DVector::zeros(prob.m_e()),
            s: SymMat::zeros(n),
            x: SymMat::zeros(n),
            z_tilde: SymMat::zeros(n),
            y_e_tilde: DVector::zeros(prob.m_e()),
            s_tilde: SymMat::zeros(n),
            tau: tau0,
            sigma,
            k: 0,
        }
    }

    /// Overwrites every tilde variable with its current value.
    pub fn sync_tilde(&mut self) {
        self.y_i_tilde = self.y_i.clone();
        self.z_tilde = self.z.clone();
        self.y_e_tilde = self.y_e.clone();
        self.s_tilde = self.s.clone();
    }

    pub fn is_finite(&self) -> bool {
        let vec_ok = |v: &DVector<f64>| v.iter().all(|e| e.is_finite());
        self.y_i.as_ref().map_or(true, vec_ok)
            && self.y_i_tilde.as_ref().map_or(true, vec_ok)
            && vec_ok(&self.y_e)
            && vec_ok(&self.y_e_tilde)
            && [&self.z, &self.s, &self.x, &self.z_tilde, &self.s_tilde].iter().all(|m| m.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        let mut m = [self.z.norm(), self.s.norm(), self.x.norm(), self.z_tilde.norm(), self.y_e.norm()]
            .into_iter()
            .fold(0.0, f64::max);
        m = m.max(self.y_e_tilde.norm());
        if let Some(y) = &self.y_i {
            m = m.max(y.norm());
        }
        m
    }
}
