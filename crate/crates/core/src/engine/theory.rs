//! Dense forms of the block operators used in the convergence analysis:
//! `ℳ` (block lower-triangular), `ℋ` (block upper-triangular) and
//! `𝒢 = ℳℋ`, all acting on `ℤ₂ × … × ℤ_p`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{MultiBlockProblem, SemiProx};
use crate::error::{Error, Result};
use crate::linalg::LinearBlockMap;

/// Largest concatenated dimension of blocks `2..p` that will be densified.
pub const MAX_THEORY_DIM: usize = 500;

/// Dense matrix of `𝒜_i` (`block_dim × space_dim`).
pub(crate) fn densify(map: &dyn LinearBlockMap) -> DMatrix<f64> {
    let d = map.block_dim();
    let m = map.space_dim();
    let mut a = DMatrix::zeros(d, m);
    let mut e = DVector::zeros(d);
    for k in 0..d {
        e[k] = 1.0;
        a.row_mut(k).copy_from(&map.apply_adjoint(&e).transpose());
        e[k] = 0.0;
    }
    a
}

/// Dense `𝒯_i` for a block given its dense map.
pub fn semiprox_matrix(kind: SemiProx, a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    match kind {
        SemiProx::Zero => DMatrix::zeros(d, d),
        SemiProx::ScaledIdentityCollapse(rho) => DMatrix::identity(d, d) * rho - a * a.transpose(),
    }
}

/// `ℳ`, `ℋ`, `𝒢 = ℳℋ` and the block offsets of `w = (z₂, …, z_p)`.
#[derive(Clone, Debug)]
pub struct TheoryOperators {
    pub m: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub g: DMatrix<f64>,
    /// Start offset of each block `2..p` inside `w`.
    pub offsets: Vec<usize>,
}

impl TheoryOperators {
    /// Stacks blocks `2..p` of `z` into `w`.
    pub fn stack(&self, z: &[DVector<f64>]) -> DVector<f64> {
        let parts: Vec<&DVector<f64>> = z.iter().skip(1).collect();
        let len = parts.iter().map(|v| v.len()).sum();
        let mut w = DVector::zeros(len);
        for (b, v) in parts.into_iter().enumerate() {
            w.rows_mut(self.offsets[b], v.len()).copy_from(v);
        }
        w
    }

    pub fn lambda_min_g(&self) -> f64 {
        let sym = (&self.g + self.g.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// `max |𝒢 − 𝒢ᵀ|`
    pub fn asymmetry(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }
}

/// Densifies `ℳ`, `ℋ` and `𝒢` for a problem whose blocks `2..p` have
/// total dimension at most [`MAX_THEORY_DIM`].
pub fn build_theory_operators(prob: &MultiBlockProblem, alpha: f64) -> Result<TheoryOperators> {
    let blocks = &prob.blocks()[1..];
    let dims: Vec<usize> = blocks.iter().map(|b| b.dim()).collect();
    let total: usize = dims.iter().sum();
    if total > MAX_THEORY_DIM {
        return Err(Error::TooLarge(format!(
            "theory operators need total dimension ≤ {MAX_THEORY_DIM}, got {total}"
        )));
    }
    let mut offsets = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for d in &dims {
        offsets.push(acc);
        acc += d;
    }
    let a: Vec<DMatrix<f64>> = blocks.iter().map(|b| densify(b.map())).collect();
    let e: Vec<DMatrix<f64>> = blocks
        .iter()
        .zip(&a)
        .map(|(b, ai)| ai * ai.transpose() + semiprox_matrix(b.semiprox(), ai))
        .collect();
    let q = blocks.len();
    let mut m = DMatrix::zeros(total, total);
    let mut h = DMatrix::zeros(total, total);
    for i in 0..q {
        let (oi, di) = (offsets[i], dims[i]);
        m.view_mut((oi, oi), (di, di)).copy_from(&e[i]);
        let diag = if i + 1 == q { alpha } else { 1.0 };
        h.view_mut((oi, oi), (di, di)).copy_from(&(DMatrix::identity(di, di) * diag));
        for j in 0..i {
            let (oj, dj) = (offsets[j], dims[j]);
            m.view_mut((oi, oj), (di, dj)).copy_from(&(&a[i] * a[j].transpose()));
        }
        if i + 1 < q {
            let chol = e[i]
                .clone()
                .cholesky()
                .ok_or_else(|| Error::InvalidProblem(format!("ℰ_{} is not positive definite", i + 2)))?;
            for j in i + 1..q {
                let (oj, dj) = (offsets[j], dims[j]);
                let block = chol.solve(&(&a[i] * a[j].transpose()));
                h.view_mut((oi, oj), (di, dj)).copy_from(&block);
            }
        }
    }
    let g = &m * &h;
    Ok(TheoryOperators { m, h, g, offsets })
}
