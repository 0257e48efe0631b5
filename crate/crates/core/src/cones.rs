//! Entrywise pattern cones, their duals, and proximal oracles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{project_psd, SymMat};

/// Classification of one entry of `X − M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryKind {
    /// Entry fixed at zero.
    Zero,
    /// Entry constrained to be nonnegative.
    NonNeg,
    /// Entry unconstrained.
    Free,
}

impl EntryKind {
    /// The kind of the same entry in the dual cone.
    pub fn dual(self) -> EntryKind {
        match self {
            EntryKind::Zero => EntryKind::Free,
            EntryKind::NonNeg => EntryKind::NonNeg,
            EntryKind::Free => EntryKind::Zero,
        }
    }

    fn project(self, v: f64) -> f64 {
        match self {
            EntryKind::Zero => 0.0,
            EntryKind::NonNeg => v.max(0.0),
            EntryKind::Free => v,
        }
    }
}

/// Symmetric per-entry cone pattern on `𝕊ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConePattern {
    n: usize,
    // Upper triangle, column-major packed: index j(j+1)/2 + i for i ≤ j.
    kinds: Vec<EntryKind>,
}

impl ConePattern {
    pub fn uniform(n: usize, kind: EntryKind) -> Self {
        ConePattern { n, kinds: vec![kind; n * (n + 1) / 2] }
    }

    pub fn nonneg(n: usize) -> Self {
        Self::uniform(n, EntryKind::NonNeg)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> EntryKind) -> Self {
        let mut kinds = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                kinds.push(f(i, j));
            }
        }
        ConePattern { n, kinds }
    }

    /// Builds a pattern from packed upper-triangle kinds (column-major).
    pub fn from_packed(n: usize, kinds: Vec<EntryKind>) -> Result<Self> {
        if kinds.len() != n * (n + 1) / 2 {
            return Err(Error::Dimension(format!(
                "pattern of order {n} needs {} kinds, got {}",
                n * (n + 1) / 2,
                kinds.len()
            )));
        }
        Ok(ConePattern { n, kinds })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[EntryKind] {
        &self.kinds
    }

    fn idx(i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        j * (j + 1) / 2 + i
    }

    pub fn kind(&self, i: usize, j: usize) -> EntryKind {
        self.kinds[Self::idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, kind: EntryKind) {
        self.kinds[Self::idx(i, j)] = kind;
    }

    pub fn dual(&self) -> ConePattern {
        ConePattern { n: self.n, kinds: self.kinds.iter().map(|k| k.dual()).collect() }
    }

    pub fn is_all(&self, kind: EntryKind) -> bool {
        self.kinds.iter().all(|&k| k == kind)
    }

    fn check(&self, x: &SymMat) {
        assert_eq!(x.n(), self.n, "pattern order {} does not match matrix order {}", self.n, x.n());
    }
}

/// Projection onto `𝒦`.
pub fn project_pattern(x: &SymMat, pattern: &ConePattern) -> SymMat {
    pattern.check(x);
    SymMat::from_fn(x.n(), |i, j| pattern.kind(i, j).project(x.get(i, j)))
}

/// Projection onto the dual cone `𝒦*`.
pub fn project_pattern_dual(z: &SymMat, pattern: &ConePattern) -> SymMat {
    pattern.check(z);
    SymMat::from_fn(z.n(), |i, j| pattern.kind(i, j).dual().project(z.get(i, j)))
}

/// Entrywise `max(0, v_i)`.
pub fn project_nonneg(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| x.max(0.0))
}

/// Proximal mapping `argmin_z θ(z) + ‖z − p‖²/(2t)` on a Euclidean space.
pub trait ProxOracle: Send + Sync {
    fn prox(&self, point: &DVector<f64>, t: f64) -> Result<DVector<f64>>;
}

/// `θ ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroFunction;

impl ProxOracle for ZeroFunction {
    fn prox(&self, point: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(point.clone())
    }
}

/// `θ(y) = δ_{ℝ₊}(y) − ⟨b, y⟩`.
#[derive(Clone, Debug)]
pub struct NonnegLinear {
    pub b: DVector<f64>,
}

impl ProxOracle for NonnegLinear {
    fn prox(&self, point: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(project_nonneg(&(point + &self.b * t)))
    }
}

/// `θ(y) = −⟨b, y⟩`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub b: DVector<f64>,
}

impl ProxOracle for Linear {
    fn prox(&self, point: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(point + &self.b * t)
    }
}

/// `θ(Z) = δ_{𝒦*}(Z) − ⟨M, Z⟩` on flattened `n × n` matrices.
#[derive(Clone, Debug)]
pub struct DualPatternLinear {
    pub pattern: ConePattern,
    pub shift: SymMat,
}

impl ProxOracle for DualPatternLinear {
    fn prox(&self, point: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let n = self.pattern.n();
        let mut p = SymMat::from_vector(n, point);
        p.axpy(t, &self.shift);
        Ok(project_pattern_dual(&p, &self.pattern).to_vector())
    }
}

/// `θ(S) = δ_{𝒮₊ⁿ}(S)` on flattened `n × n` matrices.
#[derive(Clone, Copy, Debug)]
pub struct PsdIndicator {
    pub n: usize,
}

impl ProxOracle for PsdIndicator {
    fn prox(&self, point: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(project_psd(&SymMat::from_vector(self.n, point))?.to_vector())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SymMat {
        SymMat::from_fn(rows.len(), |i, j| rows[i][j])
    }

    #[test]
    fn nonneg_projection_of_2x2() {
        let x = mat(&[&[1.0, -2.0], &[-2.0, 3.0]]);
        let p = project_pattern(&x, &ConePattern::nonneg(2));
        assert_eq!(p, mat(&[&[1.0, 0.0], &[0.0, 3.0]]));
        // self-dual orthant
        assert_eq!(project_pattern_dual(&x, &ConePattern::nonneg(2)), p);
    }

    #[test]
    fn free_pattern_projections() {
        let x = mat(&[&[1.0, -2.0], &[-2.0, 3.0]]);
        let free = ConePattern::uniform(2, EntryKind::Free);
        assert_eq!(project_pattern(&x, &free), x);
        assert_eq!(project_pattern_dual(&x, &free), SymMat::zeros(2));
    }

    #[test]
    fn nonneg_vector_projection() {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.0]);
        assert_eq!(project_nonneg(&v), DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let w = DVector::from_vec(vec![0.0, 4.0]);
        assert_eq!(project_nonneg(&w), w);
    }

    #[test]
    fn pattern_is_symmetric() {
        let mut p = ConePattern::nonneg(3);
        p.set(2, 0, EntryKind::Zero);
        assert_eq!(p.kind(0, 2), EntryKind::Zero);
        assert_eq!(p.dual().kind(2, 0), EntryKind::Free);
    }

    #[test]
    fn dual_pattern_prox_applies_shift() {
        let pattern = ConePattern::nonneg(2);
        let shift = SymMat::identity(2);
        let f = DualPatternLinear { pattern, shift };
        let z = f.prox(&DVector::from_vec(vec![-0.5, -1.0, -1.0, 2.0]), 1.0).unwrap();
        assert_eq!(z.as_slice(), &[0.5, 0.0, 0.0, 3.0]);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const KINDS: [EntryKind; 3] = [EntryKind::Zero, EntryKind::NonNeg, EntryKind::Free];

    fn setup(seed: u64, n: usize) -> (ConePattern, SymMat, SymMat) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pat = ConePattern::from_fn(n, |_, _| KINDS[rng.gen_range(0..3)]);
        let x = SymMat::from_fn(n, |_, _| rng.gen_range(-4.0..4.0));
        let y = SymMat::from_fn(n, |_, _| rng.gen_range(-4.0..4.0));
        (pat, x, y)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn moreau_split_of_pattern_cone(seed in any::<u64>(), n in 1usize..9) {
            let (pat, x, _) = setup(seed, n);
            // X = Π_𝒦(X) − Π_𝒦*(−X), parts orthogonal
            let p = project_pattern(&x, &pat);
            let q = project_pattern_dual(&-&x, &pat);
            prop_assert!((&(&p - &q) - &x).norm() <= 1e-12);
            prop_assert!(p.dot(&q).abs() <= 1e-12);
        }

        #[test]
        fn projections_idempotent_and_nonexpansive(seed in any::<u64>(), n in 1usize..9) {
            let (pat, x, y) = setup(seed, n);
            let d = (&x - &y).norm();
            for proj in [project_pattern, project_pattern_dual] {
                let px = proj(&x, &pat);
                prop_assert_eq!(&proj(&px, &pat), &px);
                prop_assert!((&px - &proj(&y, &pat)).norm() <= d + 1e-12);
            }
            let u = DVector::from_column_slice(x.as_matrix().as_slice());
            let v = DVector::from_column_slice(y.as_matrix().as_slice());
            let pu = project_nonneg(&u);
            prop_assert_eq!(&project_nonneg(&pu), &pu);
            prop_assert!((&pu - project_nonneg(&v)).norm() <= (&u - &v).norm() + 1e-12);
        }

        #[test]
        fn nonneg_projection_kkt(seed in any::<u64>(), m in 1usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = DVector::from_fn(m, |_, _| rng.gen_range(-5.0..5.0));
            let p = project_nonneg(&v);
            let r = &v - &p;
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!(r.iter().all(|&x| x <= 0.0));
            prop_assert!(r.dot(&p).abs() <= 1e-14);
        }
    }
}
