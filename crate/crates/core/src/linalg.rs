//! Dense symmetric matrices, sparse symmetric constraint lists, PSD
//! projection, and Gram-matrix utilities.
//!
//! All inner products are Frobenius (matrices) or Euclidean (vectors). A
//! symmetric matrix is flattened column-major into a vector of length `n²`
//! when it has to live in the generic engine's vector spaces; the Frobenius
//! inner product then coincides with the Euclidean one.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative eigenvalue tolerance used by [`project_psd`].
pub const EIG_REL_TOL: f64 = 1e-12;

/// Dense symmetric `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMat(DMatrix::identity(n, n))
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMat(m)
    }

    /// Takes the upper triangle of `m` as authoritative.
    pub fn from_upper(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::from_fn(m.nrows(), |i, j| m[(i, j)]))
    }

    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        SymMat((m + m.transpose()) * 0.5)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        SymMat(m)
    }

    /// Reshapes a column-major vector of length `n²`, symmetrizing it.
    pub fn from_vector(n: usize, v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), n * n, "vector length must be n²");
        let m = DMatrix::from_column_slice(n, n, v.as_slice());
        Self::symmetrize(&m)
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &SymMat) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn sum(&self) -> f64 {
        self.0.sum()
    }

    pub fn scale(&self, a: f64) -> SymMat {
        SymMat(&self.0 * a)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SymMat) {
        self.0 += &other.0 * a;
    }

    pub fn map_entries(&self, f: impl Fn(f64) -> f64) -> SymMat {
        SymMat(self.0.map(f))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_finite() {
            return Err(Error::NonFinite("symmetric eigendecomposition input"));
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

impl Add<&SymMat> for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 + &rhs.0)
    }
}

impl Sub<&SymMat> for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMat {
    type Output = SymMat;
    fn mul(self, rhs: f64) -> SymMat {
        SymMat(&self.0 * rhs)
    }
}

impl Neg for &SymMat {
    type Output = SymMat;
    fn neg(self) -> SymMat {
        SymMat(-&self.0)
    }
}

impl AddAssign<&SymMat> for SymMat {
    fn add_assign(&mut self, rhs: &SymMat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&SymMat> for SymMat {
    fn sub_assign(&mut self, rhs: &SymMat) {
        self.0 -= &rhs.0;
    }
}

/// Projection of a symmetric matrix onto the PSD cone in the Frobenius norm.
pub fn project_psd(m: &SymMat) -> Result<SymMat> {
    Ok(psd_split(m)?.0)
}

/// Returns `(Π₊(M), Π₊(−M))` from a single eigendecomposition, so that
/// `M = Π₊(M) − Π₊(−M)`.
pub fn psd_split(m: &SymMat) -> Result<(SymMat, SymMat)> {
    if !m.is_finite() {
        return Err(Error::NonFinite("PSD projection input"));
    }
    let n = m.n();
    let eig = SymmetricEigen::new(m.0.clone());
    let scale = eig.eigenvalues.amax();
    let tol = EIG_REL_TOL * scale;
    let mut pos = DMatrix::zeros(n, n);
    let mut neg = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() <= tol {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        if lam > 0.0 {
            pos.ger(lam, &v, &v, 1.0);
        } else {
            neg.ger(-lam, &v, &v, 1.0);
        }
    }
    Ok((SymMat::symmetrize(&pos), SymMat::symmetrize(&neg)))
}

/// One sparse symmetric matrix stored as upper-triangle triples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(entries: Vec<(usize, usize, f64)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
            .collect();
        SparseSym { entries }
    }

    /// Frobenius inner product with a dense symmetric matrix.
    pub fn dot(&self, x: &SymMat) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x.get(i, i) } else { 2.0 * v * x.get(i, j) })
            .sum()
    }

    /// `y += a * self`
    pub fn add_to(&self, a: f64, y: &mut SymMat) {
        for &(i, j, v) in &self.entries {
            let cur = y.get(i, j);
            y.set(i, j, cur + a * v);
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum()
    }

    pub fn to_dense(&self, n: usize) -> SymMat {
        let mut m = SymMat::zeros(n);
        self.add_to(1.0, &mut m);
        m
    }
}

/// An ordered list of `m` sparse symmetric `n × n` matrices, read as the map
/// `X ↦ (⟨A_k, X⟩)_k` with adjoint `y ↦ Σ y_k A_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSymList {
    n: usize,
    mats: Vec<SparseSym>,
}

impl SparseSymList {
    pub fn new(n: usize, mats: Vec<SparseSym>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("matrix order must be at least 1".into()));
        }
        for (k, a) in mats.iter().enumerate() {
            let mut seen = std::collections::HashSet::with_capacity(a.entries.len());
            for &(i, j, v) in &a.entries {
                if i > j || j >= n {
                    return Err(Error::IndexOutOfRange { i, j, n });
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite("constraint matrix entry"));
                }
                if !seen.insert((i, j)) {
                    return Err(Error::DuplicateEntry { k, i, j });
                }
            }
        }
        Ok(SparseSymList { n, mats })
    }

    pub fn empty(n: usize) -> Self {
        SparseSymList { n, mats: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[SparseSym] {
        &self.mats
    }

    /// `𝒜X`
    pub fn apply(&self, x: &SymMat) -> DVector<f64> {
        DVector::from_iterator(self.mats.len(), self.mats.iter().map(|a| a.dot(x)))
    }

    /// `𝒜*y`
    pub fn adjoint(&self, y: &DVector<f64>) -> SymMat {
        let mut out = SymMat::zeros(self.n);
        self.adjoint_add(1.0, y, &mut out);
        out
    }

    /// `out += a · 𝒜*y`
    pub fn adjoint_add(&self, a: f64, y: &DVector<f64>, out: &mut SymMat) {
        for (k, mat) in self.mats.iter().enumerate() {
            if y[k] != 0.0 {
                mat.add_to(a * y[k], out);
            }
        }
    }

    /// Dense Gram matrix `G_kl = ⟨A_k, A_l⟩`.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.mats.len();
        let mut by_pos: HashMap<(usize, usize), Vec<(usize, f64)>> = HashMap::new();
        for (k, a) in self.mats.iter().enumerate() {
            for &(i, j, v) in &a.entries {
                by_pos.entry((i, j)).or_default().push((k, v));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        // Deterministic accumulation order.
        let mut keys: Vec<_> = by_pos.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let list = &by_pos[&key];
            let w = if key.0 == key.1 { 1.0 } else { 2.0 };
            for &(k, vk) in list {
                for &(l, vl) in list {
                    g[(k, l)] += w * vk * vl;
                }
            }
        }
        g
    }

    /// Sum of squared Frobenius norms, an upper bound on `λ_max(𝒜𝒜*)`.
    pub fn frobenius_sq_sum(&self) -> f64 {
        self.mats.iter().map(SparseSym::norm_sq).sum()
    }

    /// Keeps only the listed constraints, in the given order.
    pub fn select(&self, rows: &[usize]) -> SparseSymList {
        SparseSymList { n: self.n, mats: rows.iter().map(|&k| self.mats[k].clone()).collect() }
    }
}

/// Linear map `𝒜_i : 𝕏 → ℤ_i` together with its adjoint, on Euclidean
/// vector spaces.
pub trait LinearBlockMap: Send + Sync {
    /// Dimension of the block space `ℤ_i`.
    fn block_dim(&self) -> usize;
    /// Dimension of the constraint space `𝕏`.
    fn space_dim(&self) -> usize;
    /// `𝒜_i x`
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `𝒜_i* z`
    fn apply_adjoint(&self, z: &DVector<f64>) -> DVector<f64>;
}

/// `𝒜_i` given as a dense `block_dim × space_dim` matrix.
#[derive(Clone, Debug)]
pub struct DenseMap(pub DMatrix<f64>);

impl LinearBlockMap for DenseMap {
    fn block_dim(&self) -> usize {
        self.0.nrows()
    }
    fn space_dim(&self) -> usize {
        self.0.ncols()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }
    fn apply_adjoint(&self, z: &DVector<f64>) -> DVector<f64> {
        self.0.tr_mul(z)
    }
}

/// Identity on a space of the given dimension.
#[derive(Clone, Copy, Debug)]
pub struct IdentityMap(pub usize);

impl LinearBlockMap for IdentityMap {
    fn block_dim(&self) -> usize {
        self.0
    }
    fn space_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn apply_adjoint(&self, z: &DVector<f64>) -> DVector<f64> {
        z.clone()
    }
}

/// A constraint list acting on column-major flattened `n × n` matrices.
///
/// `apply` is the exact adjoint of `apply_adjoint` on all of `ℝ^{n²}`, not
/// only on symmetric inputs.
#[derive(Clone, Debug)]
pub struct SparseSymMap(pub SparseSymList);

impl LinearBlockMap for SparseSymMap {
    fn block_dim(&self) -> usize {
        self.0.len()
    }
    fn space_dim(&self) -> usize {
        self.0.n() * self.0.n()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.0.n();
        DVector::from_iterator(
            self.0.len(),
            self.0.mats().iter().map(|a| {
                a.entries
                    .iter()
                    .map(|&(i, j, v)| if i == j { v * x[i + i * n] } else { v * (x[i + j * n] + x[j + i * n]) })
                    .sum::<f64>()
            }),
        )
    }
    fn apply_adjoint(&self, z: &DVector<f64>) -> DVector<f64> {
        self.0.adjoint(z).to_vector()
    }
}

/// Result of [`lambda_max_gram`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBound {
    /// Upper estimate of `λ_max(𝒜𝒜*)`.
    pub value: f64,
    /// `false` when power iteration did not converge and the Frobenius
    /// bound was returned instead.
    pub converged: bool,
}

const POWER_MAX_ITERS: usize = 200;
const POWER_REL_TOL: f64 = 1e-8;
const POWER_INFLATION: f64 = 1.0 + 1e-6;
const POWER_SEED: u64 = 0x5eed_cadd;

/// Largest eigenvalue of `𝒜𝒜*`, by power iteration on the `m × m` Gram
/// operator, inflated by `1 + 1e-6`.
pub fn lambda_max_gram(a: &SparseSymList) -> Result<SpectralBound> {
    if a.is_empty() {
        return Err(Error::InvalidProblem("lambda_max_gram needs at least one constraint".into()));
    }
    let m = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(m, |_, _| rng.gen_range(0.5..1.5));
    v /= v.norm();
    for _ in 0..POWER_MAX_ITERS {
        let w = a.apply(&a.adjoint(&v));
        let lambda = v.dot(&w);
        if !lambda.is_finite() {
            return Err(Error::NonFinite("power iteration"));
        }
        if lambda <= 0.0 {
            break;
        }
        let resid = (&w - &v * lambda).norm();
        if resid <= POWER_REL_TOL * lambda {
            return Ok(SpectralBound { value: lambda * POWER_INFLATION, converged: true });
        }
        v = &w / w.norm();
    }
    log::warn!("power iteration did not converge; falling back to the Frobenius bound");
    Ok(SpectralBound { value: a.frobenius_sq_sum(), converged: false })
}

const GRAM_PIVOT_REL: f64 = 1e-12;

/// Cached Cholesky factorization of a Gram matrix `𝒜𝒜*`.
#[derive(Clone, Debug)]
pub struct GramFactor {
    gram: DMatrix<f64>,
    lower: DMatrix<f64>,
}

impl GramFactor {
    pub fn new(a: &SparseSymList) -> Result<Self> {
        Self::from_gram(a.gram())
    }

    pub fn from_gram(gram: DMatrix<f64>) -> Result<Self> {
        let lower = cholesky_checked(&gram)?;
        Ok(GramFactor { gram, lower })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Solves `(𝒜𝒜*) y = rhs` with one step of iterative refinement.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut y = self.solve_raw(rhs);
        let r = rhs - &self.gram * &y;
        y += self.solve_raw(&r);
        y
    }

    fn solve_raw(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let m = self.dim();
        let l = &self.lower;
        let mut z = rhs.clone();
        for i in 0..m {
            let mut s = z[i];
            for k in 0..i {
                s -= l[(i, k)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for k in i + 1..m {
                s -= l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        z
    }
}

fn cholesky_checked(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = g.nrows();
    let max_diag = (0..m).map(|i| g[(i, i)]).fold(0.0_f64, f64::max);
    let floor = GRAM_PIVOT_REL * max_diag.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::SingularGram { index: j });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..m {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// One-shot solve of `(𝒜𝒜*) y = rhs`.
pub fn gram_solve(a: &SparseSymList, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if rhs.len() != a.len() {
        return Err(Error::Dimension(format!("rhs has length {}, expected {}", rhs.len(), a.len())));
    }
    Ok(GramFactor::new(a)?.solve(rhs))
}

/// Indices of a maximal linearly independent prefix-greedy subset of the
/// constraints, by Cholesky with skipping on the Gram matrix.
pub fn independent_rows(a: &SparseSymList, rel_tol: f64) -> Vec<usize> {
    let g = a.gram();
    let m = g.nrows();
    let mut kept: Vec<usize> = Vec::new();
    // Rows of L for kept constraints, indexed by position in `kept`.
    let mut l: Vec<Vec<f64>> = Vec::new();
    for j in 0..m {
        let mut row = Vec::with_capacity(kept.len() + 1);
        for (p, &kp) in kept.iter().enumerate() {
            let mut s = g[(j, kp)];
            for q in 0..p {
                s -= row[q] * l[p][q];
            }
            row.push(s / l[p][p]);
        }
        let d = g[(j, j)] - row.iter().map(|x| x * x).sum::<f64>();
        if d > rel_tol * g[(j, j)].max(f64::MIN_POSITIVE) {
            row.push(d.sqrt());
            l.push(row);
            kept.push(j);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym2(a: f64, b: f64, c: f64) -> SymMat {
        SymMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => a,
            (0, 1) => b,
            _ => c,
        })
    }

    #[test]
    fn psd_projection_clamps_diagonal() {
        let p = project_psd(&SymMat::from_diagonal(&[2.0, -1.0])).unwrap();
        assert_eq!(p, SymMat::from_diagonal(&[2.0, 0.0]));
    }

    #[test]
    fn psd_projection_is_identity_on_cone() {
        let m = sym2(2.0, 1.0, 3.0);
        let p = project_psd(&m).unwrap();
        assert!((&p - &m).norm() <= 1e-12);
    }

    #[test]
    fn psd_projection_rejects_nan() {
        let m = sym2(f64::NAN, 0.0, 1.0);
        assert!(matches!(project_psd(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn single_matrix_lambda() {
        // ‖A₁‖²_F = 4
        let a = SparseSymList::new(2, vec![SparseSym::new(vec![(0, 0, 2.0)])]).unwrap();
        let b = lambda_max_gram(&a).unwrap();
        assert!(b.converged);
        assert_relative_eq!(b.value, 4.0 * (1.0 + 1e-6), max_relative = 1e-6);
    }

    #[test]
    fn orthonormal_lambda_is_one() {
        let s = 0.5f64.sqrt();
        let a = SparseSymList::new(
            2,
            vec![SparseSym::new(vec![(0, 0, 1.0)]), SparseSym::new(vec![(0, 1, s)])],
        )
        .unwrap();
        let b = lambda_max_gram(&a).unwrap();
        assert_relative_eq!(b.value, 1.0, max_relative = 2e-6);
    }

    #[test]
    fn gram_solve_identity_and_zero() {
        let s = 0.5f64.sqrt();
        let a = SparseSymList::new(
            3,
            vec![
                SparseSym::new(vec![(0, 0, 1.0)]),
                SparseSym::new(vec![(0, 1, s)]),
                SparseSym::new(vec![(1, 2, s)]),
            ],
        )
        .unwrap();
        let r = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let y = gram_solve(&a, &r).unwrap();
        assert!((&y - &r).norm() <= 1e-14);
        let z = gram_solve(&a, &DVector::zeros(3)).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn singular_gram_names_index() {
        let a = SparseSymList::new(
            2,
            vec![
                SparseSym::new(vec![(0, 0, 1.0)]),
                SparseSym::new(vec![(1, 1, 1.0)]),
                SparseSym::new(vec![(0, 0, 1.0), (1, 1, 1.0)]),
            ],
        )
        .unwrap();
        match gram_solve(&a, &DVector::zeros(3)) {
            Err(Error::SingularGram { index }) => assert_eq!(index, 2),
            other => panic!("expected singular Gram, got {other:?}"),
        }
        assert_eq!(independent_rows(&a, 1e-10), vec![0, 1]);
    }

    #[test]
    fn sparse_list_validation() {
        assert!(matches!(
            SparseSymList::new(2, vec![SparseSym::new(vec![(0, 2, 1.0)])]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            SparseSymList::new(2, vec![SparseSym::new(vec![(0, 1, 1.0), (1, 0, 2.0)])]),
            Err(Error::DuplicateEntry { k: 0, i: 0, j: 1 })
        ));
    }

    #[test]
    fn off_diagonal_entries_count_twice() {
        let a = SparseSym::new(vec![(0, 1, 1.0)]);
        let x = sym2(0.0, 3.0, 0.0);
        assert_eq!(a.dot(&x), 6.0);
        assert_eq!(a.norm_sq(), 2.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMat {
        SymMat::from_fn(n, |_, _| rng.gen_range(-3.0..3.0))
    }

    /// Random list with `m` matrices of a few entries each.
    fn random_list(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SparseSymList {
        let mats = (0..m)
            .map(|_| {
                let mut seen = std::collections::BTreeMap::new();
                for _ in 0..rng.gen_range(1..=4) {
                    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    seen.insert((i.min(j), i.max(j)), rng.gen_range(-2.0..2.0));
                }
                SparseSym::new(seen.into_iter().map(|((i, j), v)| (i, j, v)).collect())
            })
            .collect();
        SparseSymList::new(n, mats).unwrap()
    }

    fn dense_eigs(m: &SymMat) -> DVector<f64> {
        SymmetricEigen::new(m.as_matrix().clone()).eigenvalues
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn adjoint_identity(seed in any::<u64>(), n in 1usize..7, m in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_list(n, m, &mut rng);
            // symmetric inputs through the list, arbitrary ones through the flattened map
            let u = random_sym(n, &mut rng);
            let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = a.apply(&u).dot(&v);
            let rhs = u.dot(&a.adjoint(&v));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + u.norm() * v.norm()));
            let map = SparseSymMap(a);
            let w = DVector::from_fn(n * n, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = map.apply(&w).dot(&v);
            let rhs = w.dot(&map.apply_adjoint(&v));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + w.norm() * v.norm()));
        }

        #[test]
        fn psd_projection_properties(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m1 = random_sym(n, &mut rng);
            let m2 = random_sym(n, &mut rng);
            let (p, q) = psd_split(&m1).unwrap();
            let scale = 1.0 + m1.norm();
            // Moreau: M = Π₊(M) − Π₊(−M), with orthogonal parts
            prop_assert!((&(&p - &q) - &m1).norm() <= 1e-10 * scale);
            prop_assert!(p.dot(&q).abs() <= 1e-10 * scale * scale);
            prop_assert!((&project_psd(&-&m1).unwrap() - &q).norm() <= 1e-10 * scale);
            // in the cone, idempotent
            prop_assert!(dense_eigs(&p).min() >= -1e-10 * scale);
            prop_assert!((&project_psd(&p).unwrap() - &p).norm() <= 1e-10 * scale);
            // firmly nonexpansive: ‖P₁ − P₂‖² ≤ ⟨P₁ − P₂, M₁ − M₂⟩
            let p2 = project_psd(&m2).unwrap();
            let dp = &p - &p2;
            let dm = &m1 - &m2;
            prop_assert!(dp.norm_sq() <= dp.dot(&dm) + 1e-10 * scale * scale);
            prop_assert!(dp.norm() <= dm.norm() + 1e-10);
        }

        #[test]
        fn gram_solve_matches_dense_solve(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..=n);
            // diagonal unit rows keep the list surjective, the rest is random
            let mut mats: Vec<SparseSym> = (0..m).map(|k| SparseSym::new(vec![(k, k, 1.0)])).collect();
            for (k, mat) in mats.iter_mut().enumerate() {
                let j = rng.gen_range(0..n);
                if j != k {
                    mat.entries.push((k.min(j), k.max(j), rng.gen_range(-1.0..1.0)));
                }
            }
            let a = SparseSymList::new(n, mats).unwrap();
            let rhs = DVector::from_fn(m, |_, _| rng.gen_range(-5.0..5.0));
            let y = gram_solve(&a, &rhs).unwrap();
            // Gram from dense Frobenius products of the constraint matrices
            let dense: Vec<DMatrix<f64>> = a.mats().iter().map(|s| s.to_dense(n).as_matrix().clone()).collect();
            let g = DMatrix::from_fn(m, m, |i, j| dense[i].dot(&dense[j]));
            let oracle = g.clone().lu().solve(&rhs).unwrap();
            prop_assert!((&y - &oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
            prop_assert!((&g * &y - &rhs).norm() <= 1e-12 * (1.0 + rhs.norm()) * g.norm());
        }

        #[test]
        fn lambda_max_matches_dense_eigenvalue(seed in any::<u64>(), n in 1usize..7, m in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_list(n, m, &mut rng);
            let dense: Vec<DMatrix<f64>> = a.mats().iter().map(|s| s.to_dense(n).as_matrix().clone()).collect();
            let g = DMatrix::from_fn(m, m, |i, j| dense[i].dot(&dense[j]));
            let exact = SymmetricEigen::new(g).eigenvalues.max();
            let b = lambda_max_gram(&a).unwrap();
            // an upper bound in every case, tight when converged
            prop_assert!(b.value >= exact * (1.0 - 1e-12));
            if b.converged {
                prop_assert!(b.value <= exact * (1.0 + 1e-5) + 1e-14);
            }
        }
    }
}
