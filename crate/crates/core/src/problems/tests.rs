use super::*;
use crate::dnnsdp::DnnSdpProblem;

fn lift(x: &[f64]) -> SymMat {
    let mut v = x.to_vec();
    v.push(1.0);
    SymMat::from_fn(v.len(), |i, j| v[i] * v[j])
}

fn same_data(a: &DnnSdpProblem, b: &DnnSdpProblem) -> bool {
    a.c() == b.c()
        && a.a_e() == b.a_e()
        && a.b_e() == b.b_e()
        && a.shift() == b.shift()
        && a.pattern() == b.pattern()
        && a.ineq() == b.ineq()
        && a.objective() == b.objective()
}

#[test]
fn biq_counts_and_trivial_point() {
    let d = random_biq(6, 1);
    let p = build_biq(&d).unwrap();
    assert_eq!(p.n(), 7);
    assert_eq!(p.m_e(), 7);
    let x = lift(&[0.0; 6]);
    assert_eq!(p.a_e().apply(&x), *p.b_e());
}

#[test]
fn biq_objective_matches_binary_value() {
    let d = random_biq(5, 2);
    let p = build_biq(&d).unwrap();
    for mask in 0..32u32 {
        let x: Vec<f64> = (0..5).map(|i| f64::from((mask >> i) & 1)).collect();
        let lx = lift(&x);
        assert!((p.c().dot(&lx) - d.value(&x)).abs() <= 1e-12);
        assert!((p.a_e().apply(&lx) - p.b_e()).norm() <= 1e-12);
    }
}

/// Independent enumeration of the index sets: 1-based `j = 2..n−1` with
/// `i < j` for the pair cuts, unordered triples for the triangles.
fn ext_counts(n: usize) -> (usize, usize) {
    let mut pairs = 0;
    for j1 in 2..n {
        pairs += j1 - 1;
    }
    let mut triples = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    triples += 1;
                }
            }
        }
    }
    (3 * pairs, triples / 6)
}

#[test]
fn ext_biq_row_counts() {
    for n in [3, 4, 7, 15] {
        let (pairs, tri) = ext_counts(n);
        let p = build_ext_biq(&random_biq(n, 3), &ExtBiqOptions::default()).unwrap();
        assert_eq!(p.m_i(), pairs + tri, "n = {n}");
    }
    assert_eq!(ext_counts(3), (3, 1));
    assert_eq!(ext_counts(15), (273, 455));
}

#[test]
fn ext_biq_binary_lifts_are_feasible() {
    let n = 8;
    let p = build_ext_biq(&random_biq(n, 4), &ExtBiqOptions::default()).unwrap();
    let q = p.ineq().unwrap();
    for mask in 0..(1u32 << n) {
        let x: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
        let ax = q.a.apply(&lift(&x));
        for (k, (v, b)) in ax.iter().zip(q.b.iter()).enumerate() {
            assert!(v >= &(b - 1e-12), "row {k} violated at {x:?}");
        }
    }
}

#[test]
fn ext_biq_without_inequalities_is_biq() {
    let d = random_biq(5, 5);
    let ext = build_ext_biq(&d, &ExtBiqOptions::default()).unwrap();
    assert!(same_data(&ext.without_inequalities(), &build_biq(&d).unwrap()));
}

#[test]
fn ext_biq_triangle_cap_samples_deterministically() {
    let opts = ExtBiqOptions { triangle_cap: 10, seed: 9 };
    let (r1, _) = ext_biq_rows(8, &opts);
    let (r2, _) = ext_biq_rows(8, &opts);
    assert_eq!(r1, r2);
    let pairs = ext_counts(8).0;
    assert_eq!(r1.len(), pairs + 10);
}

#[test]
fn theta_plus_counts() {
    let g = random_graph(12, 0.3, 7);
    let p = build_theta_plus(&g).unwrap();
    assert_eq!(p.m_e(), g.edges().len() + 1);
    assert_eq!(p.objective().sign, -1.0);
}

#[test]
fn rcp_counts_and_range() {
    let w = gaussian_kernel(&clustered_points(8, 2, 1), 1.0);
    let p = build_rcp(&w, 2).unwrap();
    assert_eq!(p.m_e(), 9);
    // X = I: row sums 1, trace n
    let pn = build_rcp(&w, 8).unwrap();
    let i = SymMat::identity(8);
    assert!((pn.a_e().apply(&i) - pn.b_e()).norm() <= 1e-12);
    assert!(pn.objective().apply(pn.c().dot(&i)).abs() <= 1e-12);
    assert!(build_rcp(&w, 0).is_err());
    assert!(build_rcp(&w, 9).is_err());
}

#[test]
fn fap_single_pinned_edge() {
    let g = Graph::weighted(2, [(0, 1, 3.0)]).unwrap();
    let p = build_fap(&g, &[(0, 1)], 2).unwrap();
    assert_eq!(p.pattern().kind(0, 1), EntryKind::Zero);
    assert_eq!(p.pattern().kind(0, 0), EntryKind::Free);
    assert_eq!(p.shift().get(0, 1), -1.0);
    assert!(build_fap(&g, &[(0, 1)], 1).is_err());
    assert!(build_fap(&Graph::empty(3), &[(0, 1)], 3).is_err());
}

#[test]
fn laplacian_rows_sum_to_zero() {
    let g0 = random_graph(9, 0.5, 3);
    let g = Graph::weighted(9, g0.edges().iter().enumerate().map(|(k, &(i, j))| (i, j, 1.0 + k as f64))).unwrap();
    let l = g.laplacian();
    for i in 0..9 {
        let s: f64 = (0..9).map(|j| l.get(i, j)).sum();
        assert!(s.abs() <= 1e-12);
    }
}

#[test]
fn qap_hand_count_and_rank() {
    // n = 2: three entries of ΣY^{ii}, three of ⟨I, Y^{ij}⟩, three of ⟨Γ, Y^{ij}⟩
    let (rows, b) = qap_rows(2);
    assert_eq!(rows.len(), 9);
    assert_eq!(b.len(), 9);
    let (a, bm) = random_qap(2, 1);
    let p = build_qap(&a, &bm).unwrap();
    let full = SparseSymList::new(4, rows.into_iter().map(SparseSym::new).collect()).unwrap();
    let rank = nalgebra::SymmetricEigen::new(full.gram()).eigenvalues.iter().filter(|&&l| l > 1e-9).count();
    assert_eq!(p.m_e(), rank);
    assert!(rank < 9);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn lifted_permutations_are_feasible() {
    for n in 2..=4 {
        let (a, b) = random_qap(n, n as u64);
        let p = build_qap(&a, &b).unwrap();
        let (rows, rhs) = qap_rows(n);
        let full = SparseSymList::new(n * n, rows.into_iter().map(SparseSym::new).collect()).unwrap();
        for perm in permutations(n) {
            let x = permutation_vector(&perm);
            let y = SymMat::from_fn(n * n, |i, j| x[i] * x[j]);
            assert!((full.apply(&y) - DVector::from_vec(rhs.clone())).norm() <= 1e-12);
            assert!((p.a_e().apply(&y) - p.b_e()).norm() <= 1e-12);
            assert!((p.c().dot(&y) - qap_value(&a, &b, &perm)).abs() <= 1e-9);
        }
    }
}

#[test]
fn qap_size_cap() {
    let (a, b) = random_qap(MAX_QAP_N + 1, 0);
    assert!(matches!(build_qap(&a, &b), Err(Error::TooLarge(_))));
}

#[test]
fn brute_force_biq_examples() {
    let d = BiqData::new(SymMat::zeros(2), DVector::from_vec(vec![1.0, -1.0])).unwrap();
    assert_eq!(brute_force_biq(&d).unwrap(), -1.0);
    let d = BiqData::new(SymMat::identity(3).scale(2.0), DVector::from_element(3, -3.0)).unwrap();
    assert_eq!(brute_force_biq(&d).unwrap(), -6.0);
    assert!(brute_force_biq(&random_biq(21, 0)).is_err());
}

#[test]
fn brute_force_qap_matches_enumeration() {
    let (a, b) = random_qap(5, 11);
    let (best, perm) = brute_force_qap(&a, &b).unwrap();
    let naive = permutations(5).iter().map(|p| qap_value(&a, &b, p)).fold(f64::INFINITY, f64::min);
    assert_eq!(best, naive);
    assert_eq!(qap_value(&a, &b, &perm), best);
}

#[test]
fn builders_are_deterministic() {
    for fam in [Family::Biq, Family::ExtBiq, Family::ThetaPlus, Family::Rcp, Family::Fap, Family::Qap] {
        let n = if fam == Family::Qap { 3 } else { 7 };
        let p1 = generate(fam, n, 5).unwrap();
        let p2 = generate(fam, n, 5).unwrap();
        assert!(same_data(&p1, &p2), "{fam:?}");
    }
}

#[test]
fn graph_validation() {
    assert!(Graph::new(3, [(0, 0)]).is_err());
    assert!(Graph::new(3, [(0, 3)]).is_err());
    assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
    assert_eq!(Graph::complete(4).edges().len(), 6);
}
