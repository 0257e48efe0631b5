use nalgebra::DVector;

use super::subproblems::{update_s, update_y_e, update_y_i, update_z};
use super::{DnnSdpIterate, DnnSdpProblem};
use crate::engine::{compute_delta, update_tau, SolverConfig};
use crate::error::Result;
use crate::linalg::SymMat;

/// Per-step diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DnnStepInfo {
    pub delta: f64,
    pub tau: f64,
    /// `‖𝒜_I*y_I + Z + 𝒜_E*y_E + S − C‖` at the new values.
    pub f_full_norm: f64,
    /// The same residual with only the first block updated.
    pub f_pred_norm: f64,
}

struct Sweep {
    y_i: Option<DVector<f64>>,
    z: SymMat,
    y_e: DVector<f64>,
    s: SymMat,
    f_pred: SymMat,
    f_full: SymMat,
}

/// Gauss–Seidel sweep `y_I → Z → y_E → S` with centres taken from the
/// tilde variables.
fn sweep(it: &DnnSdpIterate, prob: &DnnSdpProblem) -> Result<Sweep> {
    let sigma = it.sigma;
    let x = &it.x;
    let adj_ye_t = prob.a_e().adjoint(&it.y_e_tilde);

    // 𝒜_E*ỹ_E + S̃ − C
    let mut tail = adj_ye_t.clone();
    tail += &it.s_tilde;
    tail -= prob.c();

    let (y_i, adj_yi) = match &it.y_i_tilde {
        Some(yt) if prob.ineq().is_some() => {
            let mut r = tail.clone();
            r += &it.z_tilde;
            let y = update_y_i(prob, yt, x, &r, sigma)?;
            let adj = prob.adj_i(Some(&y));
            (Some(y), adj)
        }
        _ => (None, SymMat::zeros(prob.n())),
    };

    let mut r_z = adj_yi.clone();
    r_z += &tail;
    let z = update_z(prob, x, &r_z, sigma);

    let f_pred = if y_i.is_some() {
        // only y_I updated
        let mut f = r_z.clone();
        f += &it.z_tilde;
        f
    } else {
        &r_z + &z
    };

    let mut r_ye = adj_yi.clone();
    r_ye += &z;
    r_ye += &it.s_tilde;
    r_ye -= prob.c();
    let y_e = update_y_e(prob, x, &r_ye, sigma);

    let mut r_s = adj_yi;
    r_s += &z;
    prob.a_e().adjoint_add(1.0, &y_e, &mut r_s);
    r_s -= prob.c();
    let s = update_s(x, &r_s, sigma)?;
    let f_full = &r_s + &s;

    Ok(Sweep { y_i, z, y_e, s, f_pred, f_full })
}

/// One iteration of the corrected method.
///
/// The multiplier step uses `τ₀` on the first iteration and the adaptive
/// rule afterwards. The correction updates `ỹ_E` and then, for 4-block
/// problems, `Z̃`; `ỹ_I` and `S̃` take their new values.
pub fn cadmm_step(
    it: &DnnSdpIterate,
    prob: &DnnSdpProblem,
    cfg: &SolverConfig,
) -> Result<(DnnSdpIterate, DnnStepInfo)> {
    let sw = sweep(it, prob)?;
    let f_full_sq = sw.f_full.norm_sq();
    let f_pred_sq = sw.f_pred.norm_sq();
    let ds = &sw.s - &it.s_tilde;
    let delta = compute_delta(f_pred_sq, f_full_sq, ds.norm_sq(), cfg.eps);
    let tau = if it.k == 0 { cfg.tau0 } else { update_tau(it.tau, delta, cfg.tau_bar) };

    let mut x = it.x.clone();
    x.axpy(tau * it.sigma, &sw.f_full);

    let alpha = cfg.alpha;
    // ỹ_E⁺ = ỹ_E + α(y_E⁺ − ỹ_E) − (𝒜_E𝒜_E*)⁻¹𝒜_E(S⁺ − S̃)
    let y_e_tilde = &it.y_e_tilde + (&sw.y_e - &it.y_e_tilde) * alpha - prob.gram_e().solve(&prob.a_e().apply(&ds));
    let z_tilde = if sw.y_i.is_some() {
        // Z̃⁺ = Z̃ + α(Z⁺ − Z̃) − (S⁺ − S̃) − 𝒜_E*(ỹ_E⁺ − ỹ_E)
        let mut zt = it.z_tilde.clone();
        zt.axpy(alpha, &(&sw.z - &it.z_tilde));
        zt -= &ds;
        prob.a_e().adjoint_add(-1.0, &(&y_e_tilde - &it.y_e_tilde), &mut zt);
        zt
    } else {
        sw.z.clone()
    };

    let info = DnnStepInfo { delta, tau, f_full_norm: f_full_sq.sqrt(), f_pred_norm: f_pred_sq.sqrt() };
    let next = DnnSdpIterate {
        y_i_tilde: sw.y_i.clone(),
        y_i: sw.y_i,
        z_tilde,
        z: sw.z,
        y_e_tilde,
        y_e: sw.y_e,
        s_tilde: sw.s.clone(),
        s: sw.s,
        x,
        tau,
        sigma: it.sigma,
        k: it.k + 1,
    };
    Ok((next, info))
}

/// One iteration of the directly extended method with fixed step `tau`:
/// the same sweep, no correction, tilde variables set to the new values.
pub fn dext_step(it: &DnnSdpIterate, prob: &DnnSdpProblem, tau: f64) -> Result<(DnnSdpIterate, DnnStepInfo)> {
    let sw = sweep(it, prob)?;
    let mut x = it.x.clone();
    x.axpy(tau * it.sigma, &sw.f_full);
    let info = DnnStepInfo { delta: f64::NAN, tau, f_full_norm: sw.f_full.norm(), f_pred_norm: sw.f_pred.norm() };
    let mut next = DnnSdpIterate {
        y_i: sw.y_i,
        z: sw.z,
        y_e: sw.y_e,
        s: sw.s,
        x,
        y_i_tilde: None,
        z_tilde: SymMat::zeros(0),
        y_e_tilde: DVector::zeros(0),
        s_tilde: SymMat::zeros(0),
        tau,
        sigma: it.sigma,
        k: it.k + 1,
    };
    next.sync_tilde();
    Ok((next, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConePattern;
    use crate::dnnsdp::residuals;
    use crate::linalg::{SparseSym, SparseSymList};

    /// min ⟨C, X⟩ s.t. X₁₁ = 1, X ⪰ 0, X ≥ 0 with C = diag(1, 2): the KKT
    /// point is X = diag(1, 0), y_E = 1, S = diag(0, 2), Z = 0.
    fn tiny() -> (DnnSdpProblem, DnnSdpIterate) {
        let a = SparseSymList::new(2, vec![SparseSym::new(vec![(0, 0, 1.0)])]).unwrap();
        let prob = DnnSdpProblem::new(
            SymMat::from_diagonal(&[1.0, 2.0]),
            a,
            DVector::from_element(1, 1.0),
            None,
            SymMat::zeros(2),
            ConePattern::nonneg(2),
        )
        .unwrap();
        let mut it = DnnSdpIterate::zeros(&prob, 1.0, 1.95);
        it.x = SymMat::from_diagonal(&[1.0, 0.0]);
        it.y_e = DVector::from_element(1, 1.0);
        it.s = SymMat::from_diagonal(&[0.0, 2.0]);
        it.sync_tilde();
        (prob, it)
    }

    #[test]
    fn kkt_point_is_fixed() {
        let (prob, it) = tiny();
        assert!(residuals(&it, &prob).eta <= 1e-14);
        let (next, info) = cadmm_step(&it, &prob, &SolverConfig::default()).unwrap();
        assert!(info.f_full_norm <= 1e-12);
        assert!((&next.x - &it.x).norm() <= 1e-12);
        assert!((&next.s - &it.s).norm() <= 1e-12);
        assert!((&next.z_tilde - &it.z_tilde).norm() <= 1e-12);
        assert!((&next.y_e_tilde - &it.y_e_tilde).norm() <= 1e-12);
    }

    #[test]
    fn dext_keeps_tildes_in_sync() {
        let (prob, mut it) = tiny();
        it.x = SymMat::zeros(2);
        let (next, _) = dext_step(&it, &prob, 1.618).unwrap();
        assert_eq!(next.s_tilde, next.s);
        assert_eq!(next.z_tilde, next.z);
        assert_eq!(next.y_e_tilde, next.y_e);
    }
}
