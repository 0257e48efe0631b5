//! Seeded random instances and brute-force references.

use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    build_biq, build_ext_biq, build_fap, build_qap, build_rcp, build_theta_plus, qap_value, BiqData, ExtBiqOptions,
    Graph,
};
use crate::dnnsdp::DnnSdpProblem;
use crate::error::{Error, Result};
use crate::linalg::SymMat;

/// Random BIQ with integer entries of `Q` and `c` uniform in `[−10, 10]`.
pub fn random_biq(n: usize, seed: u64) -> BiqData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = SymMat::from_fn(n, |_, _| rng.gen_range(-10..=10) as f64);
    let c = DVector::from_fn(n, |_, _| rng.gen_range(-10..=10) as f64);
    BiqData { q, c }
}

/// Erdős–Rényi graph `G(n, p)`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("generated edges are valid")
}

/// `n` points in the plane around `k` well-separated centres, assigned
/// round-robin.
pub fn clustered_points(n: usize, k: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let c = (i % k.max(1)) as f64 * 10.0;
            [c + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
        })
        .collect()
}

/// Gaussian affinity `W_ij = exp(−‖p_i − p_j‖² / (2h²))` with bandwidth `h`;
/// the diagonal is 1.
pub fn gaussian_kernel(points: &[[f64; 2]], bandwidth: f64) -> SymMat {
    let h2 = 2.0 * bandwidth * bandwidth;
    SymMat::from_fn(points.len(), |i, j| {
        let d2 = (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2);
        (-d2 / h2).exp()
    })
}

/// FAP instance on `G(n, p)` with weights uniform in `[1, 10]`, each edge in
/// `U` with probability ¼, and `κ = 3`.
pub fn random_fap(n: usize, p: f64, seed: u64) -> Result<DnnSdpProblem> {
    let g0 = random_graph(n, p, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa9);
    let g = Graph::weighted(n, g0.edges().iter().map(|&(i, j)| (i, j, rng.gen_range(1.0..10.0))))?;
    let u: Vec<_> = g.edges().iter().copied().filter(|_| rng.gen_bool(0.25)).collect();
    build_fap(&g, &u, 3)
}

/// Random symmetric QAP data with integer entries in `[0, 9]` and zero
/// diagonals.
pub fn random_qap(n: usize, seed: u64) -> (SymMat, SymMat) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = || SymMat::from_fn(n, |i, j| if i == j { 0.0 } else { rng.gen_range(0..=9) as f64 });
    let a = m();
    let b = m();
    (a, b)
}

pub const MAX_BRUTE_FORCE_BIQ: usize = 20;

/// Exact BIQ minimum by enumerating `{0,1}ⁿ`.
pub fn brute_force_biq(d: &BiqData) -> Result<f64> {
    let n = d.n();
    if n > MAX_BRUTE_FORCE_BIQ {
        return Err(Error::TooLarge(format!("brute force needs n ≤ {MAX_BRUTE_FORCE_BIQ}, got {n}")));
    }
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; n];
    for mask in 0u32..(1u32 << n) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = f64::from((mask >> i) & 1);
        }
        best = best.min(d.value(&x));
    }
    Ok(best)
}

pub const MAX_BRUTE_FORCE_QAP: usize = 8;

/// Exact QAP minimum `min_P ⟨P, APB⟩` and a minimizing permutation.
pub fn brute_force_qap(a: &SymMat, b: &SymMat) -> Result<(f64, Vec<usize>)> {
    let n = a.n();
    if n > MAX_BRUTE_FORCE_QAP {
        return Err(Error::TooLarge(format!("brute force needs n ≤ {MAX_BRUTE_FORCE_QAP}, got {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (qap_value(a, b, &perm), perm.clone());
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = qap_value(a, b, &perm);
            if v < best.0 {
                best = (v, perm.clone());
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Problem families accepted by [`generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Biq,
    ExtBiq,
    ThetaPlus,
    Rcp,
    Fap,
    Qap,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "biq" => Ok(Family::Biq),
            "extbiq" | "ext-biq" | "ext_biq" => Ok(Family::ExtBiq),
            "theta" | "theta+" | "thetaplus" | "theta-plus" => Ok(Family::ThetaPlus),
            "rcp" => Ok(Family::Rcp),
            "fap" => Ok(Family::Fap),
            "qap" => Ok(Family::Qap),
            other => Err(Error::InvalidConfig(format!(
                "unknown family '{other}' (expected biq, extbiq, theta, rcp, fap or qap)"
            ))),
        }
    }
}

/// Seeded random instance of a family:
///
/// * `biq`, `extbiq`: [`random_biq`] of size `n`
/// * `theta`: θ₊ on `G(n, 0.3)`
/// * `rcp`: two clusters of `n` points, Gaussian kernel with `h = 1`, `κ = 2`
/// * `fap`: [`random_fap`] on `G(n, 0.5)`
/// * `qap`: [`random_qap`] of size `n`
pub fn generate(family: Family, n: usize, seed: u64) -> Result<DnnSdpProblem> {
    if n == 0 {
        return Err(Error::InvalidConfig("instance size must be positive".into()));
    }
    match family {
        Family::Biq => build_biq(&random_biq(n, seed)),
        Family::ExtBiq => build_ext_biq(&random_biq(n, seed), &ExtBiqOptions { seed, ..ExtBiqOptions::default() }),
        Family::ThetaPlus => build_theta_plus(&random_graph(n, 0.3, seed)),
        Family::Rcp => build_rcp(&gaussian_kernel(&clustered_points(n, 2, seed), 1.0), 2.min(n)),
        Family::Fap => random_fap(n, 0.5, seed),
        Family::Qap => {
            let (a, b) = random_qap(n, seed);
            build_qap(&a, &b)
        }
    }
}

/// `FAMILY:SIZE:SEED`, e.g. `biq:20:7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl FromStr for GenSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidConfig(format!("expected FAMILY:SIZE:SEED, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(GenSpec {
            family: parts[0].parse()?,
            n: parts[1].parse().map_err(|_| bad())?,
            seed: parts[2].parse().map_err(|_| bad())?,
        })
    }
}

impl std::fmt::Display for GenSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fam = match self.family {
            Family::Biq => "biq",
            Family::ExtBiq => "extbiq",
            Family::ThetaPlus => "theta",
            Family::Rcp => "rcp",
            Family::Fap => "fap",
            Family::Qap => "qap",
        };
        write!(f, "{fam}:{}:{}", self.n, self.seed)
    }
}

impl GenSpec {
    pub fn generate(&self) -> Result<DnnSdpProblem> {
        generate(self.family, self.n, self.seed)
    }
}
