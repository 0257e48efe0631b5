//! The DNN-SDP dual as a generic multi-block problem on column-major
//! flattened `n × n` matrices.

use std::sync::Arc;

use nalgebra::DVector;

use super::{DnnSdpIterate, DnnSdpProblem};
use crate::cones::{DualPatternLinear, Linear, NonnegLinear, PsdIndicator};
use crate::engine::{BlockSpec, IdentityProxSubsolver, IterateState, MultiBlockProblem, SubproblemInput, Subsolver};
use crate::error::Result;
use crate::linalg::{GramFactor, IdentityMap, LinearBlockMap, SparseSymList, SparseSymMap, SymMat};

/// Exact `y_E` subsolver: `(𝒜𝒜*) y = b/σ − 𝒜(x/σ + r)`.
pub struct GramSubsolver {
    map: SparseSymMap,
    b: DVector<f64>,
    gram: GramFactor,
}

impl GramSubsolver {
    pub fn new(a: SparseSymList, b: DVector<f64>, gram: GramFactor) -> Self {
        GramSubsolver { map: SparseSymMap(a), b, gram }
    }
}

impl Subsolver for GramSubsolver {
    fn solve(&self, input: &SubproblemInput<'_>) -> std::result::Result<DVector<f64>, String> {
        let inner = input.multiplier / input.sigma + input.partial_residual;
        let rhs = &self.b / input.sigma - self.map.apply(&inner);
        Ok(self.gram.solve(&rhs))
    }
}

/// Blocks `[y_I,] Z, y_E, S` with `c = vec(C)`.
///
/// `y_I` uses `𝒯 = λℐ − 𝒜_I𝒜_I*`; the other blocks use `𝒯 = 0` with
/// `ℰ_Z = ℐ` and `ℰ_{y_E} = 𝒜_E𝒜_E*`.
pub fn to_multiblock(prob: &DnnSdpProblem) -> Result<MultiBlockProblem> {
    let n = prob.n();
    let n2 = n * n;
    let mut blocks = Vec::with_capacity(4);
    if let (Some(q), Some(lambda)) = (prob.ineq(), prob.lambda_i()) {
        blocks.push(BlockSpec::collapsed(
            Arc::new(SparseSymMap(q.a.clone())),
            Arc::new(NonnegLinear { b: q.b.clone() }),
            lambda,
        ));
    }
    let z_prox = Arc::new(DualPatternLinear { pattern: prob.pattern().clone(), shift: prob.shift().clone() });
    blocks.push(
        BlockSpec::exact(Arc::new(IdentityMap(n2)), Arc::new(IdentityProxSubsolver::new(z_prox.clone())))
            .with_prox(z_prox)
            .with_einv(Arc::new(|v: &DVector<f64>| v.clone())),
    );
    let gram = prob.gram_e().clone();
    let gram_inv = gram.clone();
    blocks.push(
        BlockSpec::exact(
            Arc::new(SparseSymMap(prob.a_e().clone())),
            Arc::new(GramSubsolver::new(prob.a_e().clone(), prob.b_e().clone(), gram)),
        )
        .with_prox(Arc::new(Linear { b: prob.b_e().clone() }))
        .with_einv(Arc::new(move |v: &DVector<f64>| gram_inv.solve(v))),
    );
    let psd = Arc::new(PsdIndicator { n });
    blocks.push(BlockSpec::exact(Arc::new(IdentityMap(n2)), Arc::new(IdentityProxSubsolver::new(psd.clone()))).with_prox(psd));
    MultiBlockProblem::new(blocks, prob.c().to_vector())
}

/// Generic state holding the same values and tildes as `it`.
pub fn to_generic_state(it: &DnnSdpIterate, gp: &MultiBlockProblem) -> IterateState {
    let mut z = Vec::with_capacity(4);
    let mut zt = Vec::with_capacity(4);
    if let (Some(y), Some(yt)) = (&it.y_i, &it.y_i_tilde) {
        z.push(y.clone());
        zt.push(yt.clone());
    }
    z.extend([it.z.to_vector(), it.y_e.clone(), it.s.to_vector()]);
    zt.extend([it.z_tilde.to_vector(), it.y_e_tilde.clone(), it.s_tilde.to_vector()]);
    let mut st = IterateState::new(gp, zt, it.x.to_vector(), it.tau);
    st.z = z;
    st.k = it.k;
    st
}

/// Inverse of [`to_generic_state`]; σ is not part of the generic state.
pub fn from_generic_state(st: &IterateState, prob: &DnnSdpProblem, sigma: f64) -> DnnSdpIterate {
    let n = prob.n();
    let off = usize::from(prob.ineq().is_some());
    let (y_i, y_i_tilde) = if off == 1 { (Some(st.z[0].clone()), Some(st.z_tilde[0].clone())) } else { (None, None) };
    DnnSdpIterate {
        y_i,
        y_i_tilde,
        z: SymMat::from_vector(n, &st.z[off]),
        y_e: st.z[off + 1].clone(),
        s: SymMat::from_vector(n, &st.z[off + 2]),
        x: SymMat::from_vector(n, &st.x),
        z_tilde: SymMat::from_vector(n, &st.z_tilde[off]),
        y_e_tilde: st.z_tilde[off + 1].clone(),
        s_tilde: SymMat::from_vector(n, &st.z_tilde[off + 2]),
        tau: st.tau,
        sigma,
        k: st.k,
    }
}
