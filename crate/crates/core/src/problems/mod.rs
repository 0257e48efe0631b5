//! Builders for the BIQ, extended BIQ, θ₊, RCP, FAP and QAP relaxations.
//!
//! Every builder stores its problem as `min ⟨C, X⟩` and records how to map
//! the stored value back to the family's own objective in the problem's
//! [`ObjectiveMap`]. Constraint rows are emitted in a fixed order: per-index
//! rows ascending, then the corner or trace row, then the remaining
//! families in the order they are listed.

mod generators;
mod readers;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cones::{ConePattern, EntryKind};
use crate::dnnsdp::{DnnSdpProblem, Inequalities, ObjectiveMap};
use crate::error::{Error, Result};
use crate::linalg::{independent_rows, SparseSym, SparseSymList, SymMat};

pub use generators::{
    brute_force_biq, brute_force_qap, clustered_points, gaussian_kernel, generate, random_biq, random_fap,
    random_graph, random_qap, Family, GenSpec, MAX_BRUTE_FORCE_BIQ, MAX_BRUTE_FORCE_QAP,
};
pub use readers::{parse_biqmac, parse_dimacs, parse_qaplib, read_biqmac, read_dimacs, read_qaplib};

/// Simple undirected graph with optional edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl Graph {
    /// Unweighted graph; edges are normalized to `i < j`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::weighted(n, edges.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    /// Weighted graph. Self-loops, out-of-range indices and repeated edges
    /// are rejected.
    pub fn weighted(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<(usize, usize, f64)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, j, w) in edges {
            if i == j {
                return Err(Error::InvalidProblem(format!("self-loop at vertex {i}")));
            }
            let (i, j) = (i.min(j), i.max(j));
            if j >= n {
                return Err(Error::IndexOutOfRange { i, j, n });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("edge weight"));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidProblem(format!("edge ({i}, {j}) listed twice")));
            }
            list.push((i, j, w));
        }
        list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(Graph {
            n,
            edges: list.iter().map(|e| (e.0, e.1)).collect(),
            weights: list.iter().map(|e| e.2).collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|j| (0..j).map(move |i| (i, j)));
        Self::new(n, edges).expect("complete graph is valid")
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new(), weights: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Symmetric weight matrix, zero off the edge set.
    pub fn weight_matrix(&self) -> SymMat {
        let mut w = SymMat::zeros(self.n);
        for (&(i, j), &v) in self.edges.iter().zip(&self.weights) {
            w.set(i, j, v);
        }
        w
    }

    /// `L(G, W) = Diag(We) − W`
    pub fn laplacian(&self) -> SymMat {
        let w = self.weight_matrix();
        let mut l = -&w;
        for i in 0..self.n {
            let d: f64 = (0..self.n).map(|j| w.get(i, j)).sum();
            l.set(i, i, d);
        }
        l
    }
}

/// Data of `min ½xᵀQx + ⟨c, x⟩` over `x ∈ {0,1}ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiqData {
    pub q: SymMat,
    pub c: DVector<f64>,
}

impl BiqData {
    pub fn new(q: SymMat, c: DVector<f64>) -> Result<Self> {
        if q.n() != c.len() {
            return Err(Error::Dimension(format!("Q has order {}, c has length {}", q.n(), c.len())));
        }
        Ok(BiqData { q, c })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        0.5 * x.dot(&(self.q.as_matrix() * &x)) + self.c.dot(&x)
    }
}

fn list(n: usize, rows: Vec<Vec<(usize, usize, f64)>>) -> Result<SparseSymList> {
    SparseSymList::new(n, rows.into_iter().map(SparseSym::new).collect())
}

/// Objective block `[[Q/2, c/2], [cᵀ/2, 0]]` and the rows
/// `Y_kk − x_k = 0` (k ascending) followed by the corner row `α = 1`.
fn biq_parts(d: &BiqData) -> (SymMat, Vec<Vec<(usize, usize, f64)>>, Vec<f64>) {
    let n = d.n();
    let c = SymMat::from_fn(n + 1, |i, j| {
        if j < n {
            0.5 * d.q.get(i, j)
        } else if i < n {
            0.5 * d.c[i]
        } else {
            0.0
        }
    });
    let mut rows: Vec<Vec<(usize, usize, f64)>> = (0..n).map(|k| vec![(k, k, 1.0), (k, n, -0.5)]).collect();
    rows.push(vec![(n, n, 1.0)]);
    let mut b = vec![0.0; n];
    b.push(1.0);
    (c, rows, b)
}

/// Doubly nonnegative relaxation of a BIQ on `X = [Y x; xᵀ α]` of order
/// `n + 1`.
pub fn build_biq(d: &BiqData) -> Result<DnnSdpProblem> {
    let n = d.n();
    let (c, rows, b) = biq_parts(d);
    DnnSdpProblem::new(
        c,
        list(n + 1, rows)?,
        DVector::from_vec(b),
        None,
        SymMat::zeros(n + 1),
        ConePattern::nonneg(n + 1),
    )
}

/// Triangle rows kept when no cap is given: every triple for `n ≤ 25`.
pub const DEFAULT_TRIANGLE_CAP: usize = 2300;

/// Options for [`build_ext_biq`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtBiqOptions {
    /// Maximum number of triangle rows; larger families are sampled
    /// uniformly without replacement.
    pub triangle_cap: usize,
    pub seed: u64,
}

impl Default for ExtBiqOptions {
    fn default() -> Self {
        ExtBiqOptions { triangle_cap: DEFAULT_TRIANGLE_CAP, seed: 0 }
    }
}

/// Inequality rows of the extended BIQ in canonical order.
///
/// Pair cuts for 0-based `j ∈ [1, n−2]` and `i < j`, three rows each:
/// `−Y_ij + x_i ≥ 0`, `−Y_ij + x_j ≥ 0`, `Y_ij − x_i − x_j ≥ −1`. Then the
/// triangle rows `Y_ij + Y_ik + Y_jk − x_i − x_j − x_k ≥ −1` over triples
/// `i < j < k` in lexicographic order.
pub fn ext_biq_rows(n: usize, opts: &ExtBiqOptions) -> (Vec<Vec<(usize, usize, f64)>>, Vec<f64>) {
    let a = n; // corner index
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for j in 1..n.saturating_sub(1) {
        for i in 0..j {
            rows.push(vec![(i, j, -0.5), (i, a, 0.5)]);
            b.push(0.0);
            rows.push(vec![(i, j, -0.5), (j, a, 0.5)]);
            b.push(0.0);
            rows.push(vec![(i, j, 0.5), (i, a, -0.5), (j, a, -0.5)]);
            b.push(-1.0);
        }
    }
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                triples.push((i, j, k));
            }
        }
    }
    if triples.len() > opts.triangle_cap {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut keep = sample(&mut rng, triples.len(), opts.triangle_cap).into_vec();
        keep.sort_unstable();
        triples = keep.into_iter().map(|t| triples[t]).collect();
    }
    for (i, j, k) in triples {
        rows.push(vec![(i, j, 0.5), (i, k, 0.5), (j, k, 0.5), (i, a, -0.5), (j, a, -0.5), (k, a, -0.5)]);
        b.push(-1.0);
    }
    (rows, b)
}

/// BIQ relaxation with the pair cuts and triangle inequalities as the
/// inequality block.
pub fn build_ext_biq(d: &BiqData, opts: &ExtBiqOptions) -> Result<DnnSdpProblem> {
    let n = d.n();
    let (rows, b) = ext_biq_rows(n, opts);
    let ineq = Inequalities { a: list(n + 1, rows)?, b: DVector::from_vec(b) };
    let base = build_biq(d)?;
    DnnSdpProblem::new(
        base.c().clone(),
        base.a_e().clone(),
        base.b_e().clone(),
        Some(ineq),
        base.shift().clone(),
        base.pattern().clone(),
    )
}

/// `θ₊(G) = max ⟨eeᵀ, X⟩` over `⟨Ξ_ij, X⟩ = 0` for edges, `tr X = 1`,
/// `X ⪰ 0`, `X ≥ 0`, stored with `C = −eeᵀ`.
pub fn build_theta_plus(g: &Graph) -> Result<DnnSdpProblem> {
    let n = g.n();
    let mut rows: Vec<Vec<(usize, usize, f64)>> = g.edges().iter().map(|&(i, j)| vec![(i, j, 1.0)]).collect();
    rows.push((0..n).map(|i| (i, i, 1.0)).collect());
    let mut b = vec![0.0; g.edges().len()];
    b.push(1.0);
    Ok(DnnSdpProblem::new(
        SymMat::from_fn(n, |_, _| -1.0),
        list(n, rows)?,
        DVector::from_vec(b),
        None,
        SymMat::zeros(n),
        ConePattern::nonneg(n),
    )?
    .with_objective(ObjectiveMap { sign: -1.0, offset: 0.0 }))
}

/// `min ⟨W, I − X⟩` over `Xe = e`, `tr X = κ`, `X ⪰ 0`, `X ≥ 0`, stored as
/// `C = −W` with offset `tr W`.
pub fn build_rcp(w: &SymMat, kappa: usize) -> Result<DnnSdpProblem> {
    let n = w.n();
    if kappa < 1 || kappa > n {
        return Err(Error::InvalidProblem(format!("κ = {kappa} must lie in [1, {n}]")));
    }
    let mut rows: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { (i, i, 1.0) } else { (i, j, 0.5) }).collect())
        .collect();
    rows.push((0..n).map(|i| (i, i, 1.0)).collect());
    let mut b = vec![1.0; n];
    b.push(kappa as f64);
    Ok(DnnSdpProblem::new(
        -w,
        list(n, rows)?,
        DVector::from_vec(b),
        None,
        SymMat::zeros(n),
        ConePattern::nonneg(n),
    )?
    .with_objective(ObjectiveMap { sign: 1.0, offset: w.trace() }))
}

/// `max ⟨((κ−1)/2κ)L(G,W) − ½Diag(We), X⟩` over `diag X = e`, `X ⪰ 0`,
/// `X − M ∈ 𝒦`, with `M_ij = −1/(κ−1)` on edges, `𝒦` pinning the entries in
/// `u` and bounding the other edges from below, stored with `C` negated.
pub fn build_fap(g: &Graph, u: &[(usize, usize)], kappa: usize) -> Result<DnnSdpProblem> {
    if kappa < 2 {
        return Err(Error::InvalidProblem(format!("κ = {kappa} must be at least 2")));
    }
    let n = g.n();
    let k = kappa as f64;
    let w = g.weight_matrix();
    let lap = g.laplacian();
    let c = SymMat::from_fn(n, |i, j| {
        let deg = if i == j { (0..n).map(|l| w.get(i, l)).sum::<f64>() } else { 0.0 };
        -((k - 1.0) / (2.0 * k) * lap.get(i, j) - 0.5 * deg)
    });
    let mut pattern = ConePattern::uniform(n, EntryKind::Free);
    let mut shift = SymMat::zeros(n);
    for &(i, j) in g.edges() {
        pattern.set(i, j, EntryKind::NonNeg);
        shift.set(i, j, -1.0 / (k - 1.0));
    }
    for &(i, j) in u {
        if !g.has_edge(i, j) {
            return Err(Error::InvalidProblem(format!("({i}, {j}) is in U but not an edge")));
        }
        pattern.set(i, j, EntryKind::Zero);
    }
    let rows = (0..n).map(|i| vec![(i, i, 1.0)]).collect();
    Ok(DnnSdpProblem::new(c, list(n, rows)?, DVector::from_element(n, 1.0), None, shift, pattern)?
        .with_objective(ObjectiveMap { sign: -1.0, offset: 0.0 }))
}

/// Largest QAP size accepted by [`build_qap`] (matrix order `n²`).
pub const MAX_QAP_N: usize = 8;

/// Rows of the three QAP equality families in canonical order, before
/// redundant rows are removed: `Σ_i Y^{ii} = I` over `a ≤ b`, then
/// `⟨I, Y^{ij}⟩ = δ_ij` and `⟨Γ, Y^{ij}⟩ = 1` over `i ≤ j`.
pub fn qap_rows(n: usize) -> (Vec<Vec<(usize, usize, f64)>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for bb in 0..n {
        for a in 0..=bb {
            let v = if a == bb { 1.0 } else { 0.5 };
            rows.push((0..n).map(|i| (i * n + a, i * n + bb, v)).collect());
            b.push(if a == bb { 1.0 } else { 0.0 });
        }
    }
    for j in 0..n {
        for i in 0..=j {
            let v = if i == j { 1.0 } else { 0.5 };
            rows.push((0..n).map(|a| (i * n + a, j * n + a, v)).collect());
            b.push(if i == j { 1.0 } else { 0.0 });
        }
    }
    for j in 0..n {
        for i in 0..=j {
            let mut e = Vec::new();
            if i == j {
                for bb in 0..n {
                    for a in 0..=bb {
                        e.push((i * n + a, i * n + bb, 1.0));
                    }
                }
            } else {
                for a in 0..n {
                    for bb in 0..n {
                        e.push((i * n + a, j * n + bb, 0.5));
                    }
                }
            }
            rows.push(e);
            b.push(1.0);
        }
    }
    (rows, b)
}

/// `B ⊗ A` as an `n² × n²` symmetric matrix, entry `(in+a, jn+b) = B_ij A_ab`.
pub fn kron(b: &SymMat, a: &SymMat) -> SymMat {
    let n = a.n();
    SymMat::from_fn(n * n, |p, q| b.get(p / n, q / n) * a.get(p % n, q % n))
}

/// QAP relaxation of order `n²`. Linearly dependent rows of the three
/// families are dropped so that `𝒜_E` is surjective.
pub fn build_qap(a: &SymMat, b: &SymMat) -> Result<DnnSdpProblem> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::Dimension(format!("A has order {n}, B has order {}", b.n())));
    }
    if n > MAX_QAP_N {
        return Err(Error::TooLarge(format!("QAP of size {n} exceeds the cap of {MAX_QAP_N} (matrix order n²)")));
    }
    let n2 = n * n;
    let (rows, rhs) = qap_rows(n);
    let full = list(n2, rows)?;
    let keep = independent_rows(&full, 1e-10);
    let rhs = DVector::from_iterator(keep.len(), keep.iter().map(|&k| rhs[k]));
    DnnSdpProblem::new(kron(b, a), full.select(&keep), rhs, None, SymMat::zeros(n2), ConePattern::nonneg(n2))
}

/// `vec(P)` for the permutation matrix with `P[perm[j], j] = 1`.
pub fn permutation_vector(perm: &[usize]) -> DVector<f64> {
    let n = perm.len();
    let mut x = DVector::zeros(n * n);
    for (j, &i) in perm.iter().enumerate() {
        x[j * n + i] = 1.0;
    }
    x
}

/// `⟨P, A P B⟩` for the permutation matrix of `perm`.
pub fn qap_value(a: &SymMat, b: &SymMat, perm: &[usize]) -> f64 {
    let n = perm.len();
    let mut p = DMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = 1.0;
    }
    let apb = a.as_matrix() * &p * b.as_matrix();
    p.dot(&apb)
}

#[cfg(test)]
mod tests;
