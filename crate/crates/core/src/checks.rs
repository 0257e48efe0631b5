//! Self-checks behind `cadmm check` and the acceptance suite.
//!
//! Each check runs on seeded instances and returns a [`CheckOutcome`]. The
//! oracles here are written against dense matrices and the literal
//! subproblem objectives, not against the solver's closed forms.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{run_bench, ConfigOverrides, Manifest, ProblemSource, SolverKind, SolverSpec};
use crate::cones::EntryKind;
use crate::dnnsdp::{
    cadmm_solve_observed, cadmm_step, default_config, to_generic_state, to_multiblock, update_s, update_y_e,
    update_y_i, update_z, DnnSdpIterate, DnnSdpProblem, TuningPolicy,
};
use crate::engine::{
    build_theory_operators, BlockSpec, CorrectedAdmm, DenseEInverse, MultiBlockProblem, QuadraticBlock,
    QuadraticExactSubsolver, SolverConfig,
};
use crate::error::Result;
use crate::linalg::{DenseMap, SparseSymList, SymMat};
use crate::problems::{
    brute_force_biq, build_biq, build_ext_biq, build_theta_plus, generate, random_biq, ExtBiqOptions, Family, GenSpec,
    Graph,
};
use crate::SolveStatus;

/// Result of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks are reported but never fail.
    pub informational: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome { id, name, passed, informational: false, detail }
    }

    fn error(id: u8, name: &'static str, e: impl std::fmt::Display) -> Self {
        Self::new(id, name, false, format!("error: {e}"))
    }

    /// `PASS`/`FAIL`/`INFO` line.
    pub fn line(&self) -> String {
        let tag = if self.informational {
            "INFO"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        format!("{tag} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

pub const ALL_CHECKS: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

/// τ sequences collected from every corrected solve run by the checks.
#[derive(Clone, Debug, Default)]
pub struct TauLog {
    pub runs: Vec<TauRun>,
}

#[derive(Clone, Debug)]
pub struct TauRun {
    pub label: String,
    pub tau: Vec<f64>,
    /// Iterations after which τ was reset.
    pub restarts: Vec<usize>,
    pub tau_bar: f64,
    pub tau0: f64,
}

/// First violation of the step-size law in `tau` (entry `k` is the τ used
/// by iteration `k + 1`): values in `[τ̄, τ₀]`, nonincreasing between
/// restarts, and absorbing at `τ̄`.
pub fn tau_law_violation(run: &TauRun) -> Option<String> {
    let mut segment_start = 0;
    for (k, &t) in run.tau.iter().enumerate() {
        if !(run.tau_bar..=run.tau0).contains(&t) {
            return Some(format!("{}: τ = {t} outside [{}, {}] at iteration {}", run.label, run.tau_bar, run.tau0, k + 1));
        }
        if run.restarts.contains(&k) {
            segment_start = k;
        }
        if k > segment_start {
            let prev = run.tau[k - 1];
            if t > prev {
                return Some(format!("{}: τ rose from {prev} to {t} at iteration {}", run.label, k + 1));
            }
            if prev == run.tau_bar && t != run.tau_bar {
                return Some(format!("{}: τ left the floor at iteration {}", run.label, k + 1));
            }
        }
    }
    None
}

/// Random dense quadratic instance for the engine checks: `p ∈ {3, 4, 5}`
/// blocks on a constraint space of dimension 6 to 12, alternating `𝒯 = 0`
/// blocks with collapsed `𝒯 = ϱℐ − 𝒜𝒜*` blocks, and a feasible `c`.
pub fn random_dense_problem(seed: u64) -> Result<MultiBlockProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = 3 + (seed % 3) as usize;
    let m = rng.gen_range(6..=12);
    let mut blocks = Vec::with_capacity(p);
    let mut c = DVector::zeros(m);
    for i in 0..p {
        let d = rng.gen_range(2..=m);
        let a = DMatrix::from_fn(d, m, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let theta = QuadraticBlock {
            q_mat: &b * b.transpose() / d as f64 + DMatrix::identity(d, d) * 0.1,
            q_vec: DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)),
        };
        let z0 = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        c += a.tr_mul(&z0);
        let map = Arc::new(DenseMap(a.clone()));
        let block = if i % 2 == 1 {
            let rho = 1.05 * SymmetricEigen::new(&a * a.transpose()).eigenvalues.max();
            BlockSpec::collapsed(map, Arc::new(theta), rho)
        } else {
            let semiprox = DMatrix::zeros(d, d);
            let einv = DenseEInverse::new(&a, &semiprox)?;
            let sub = QuadraticExactSubsolver { theta: theta.clone(), a, semiprox };
            BlockSpec::exact(map, Arc::new(sub)).with_prox(Arc::new(theta)).with_einv(Arc::new(einv))
        };
        blocks.push(block);
    }
    MultiBlockProblem::new(blocks, c)
}

const ENGINE_INSTANCES: u64 = 20;
const ENGINE_STEPS: usize = 200;

fn check_correction_identity(log: &mut TauLog) -> CheckOutcome {
    const NAME: &str = "correction identity on 20 dense instances";
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..ENGINE_INSTANCES {
        let run = || -> Result<(f64, Vec<f64>)> {
            let prob = random_dense_problem(seed)?;
            let ops = build_theory_operators(&prob, cfg.alpha)?;
            let mut solver = CorrectedAdmm::new(&prob, cfg.clone())?;
            let mut ratio = 0.0f64;
            let mut taus = Vec::with_capacity(ENGINE_STEPS);
            for _ in 0..ENGINE_STEPS {
                let wt = ops.stack(&solver.state().z_tilde);
                let info = solver.step()?;
                taus.push(info.tau);
                let w = ops.stack(&solver.state().z);
                let wt1 = ops.stack(&solver.state().z_tilde);
                let res = (&ops.h * (&wt1 - &wt) - (&w - &wt) * cfg.alpha).norm();
                ratio = ratio.max(res / (1e-9 * (1.0 + wt.norm())));
            }
            Ok((ratio, taus))
        };
        match run() {
            Ok((r, taus)) => {
                worst = worst.max(r);
                log.runs.push(TauRun {
                    label: format!("dense seed {seed}"),
                    tau: taus,
                    restarts: Vec::new(),
                    tau_bar: cfg.tau_bar,
                    tau0: cfg.tau0,
                });
            }
            Err(e) => return CheckOutcome::error(1, NAME, format!("seed {seed}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    CheckOutcome::new(
        1,
        NAME,
        worst <= 1.0 && secs < 10.0,
        format!(
            "max ‖ℋΔw̃ − α(w − w̃)‖ / (1e-9·(1+‖w̃‖)) = {worst:.3e} over {ENGINE_STEPS} steps each, {secs:.2} s (limit 10 s)"
        ),
    )
}

fn check_g_positive_definite() -> CheckOutcome {
    const NAME: &str = "𝒢 positive definite on the same instances";
    let mut min_l = f64::INFINITY;
    let mut asym = 0.0f64;
    for seed in 0..ENGINE_INSTANCES {
        match random_dense_problem(seed).and_then(|p| build_theory_operators(&p, SolverConfig::default().alpha)) {
            Ok(ops) => {
                min_l = min_l.min(ops.lambda_min_g());
                asym = asym.max(ops.asymmetry() / (1.0 + ops.g.amax()));
            }
            Err(e) => return CheckOutcome::error(2, NAME, format!("seed {seed}: {e}")),
        }
    }
    CheckOutcome::new(
        2,
        NAME,
        min_l > 0.0,
        format!("min λ_min(𝒢) = {min_l:.3e}, max relative asymmetry {asym:.1e}"),
    )
}

fn check_tau_law(log: &TauLog) -> CheckOutcome {
    const NAME: &str = "step-size law on every corrected solve";
    let steps: usize = log.runs.iter().map(|r| r.tau.len()).sum();
    if log.runs.is_empty() {
        return CheckOutcome::new(3, NAME, false, "no τ sequences were recorded".into());
    }
    let floor_hits = log.runs.iter().filter(|r| r.tau.contains(&r.tau_bar)).count();
    match log.runs.iter().find_map(tau_law_violation) {
        Some(v) => CheckOutcome::new(3, NAME, false, v),
        None => CheckOutcome::new(
            3,
            NAME,
            true,
            format!(
                "{} runs, {steps} steps: in [τ̄, τ₀], nonincreasing between restarts; {floor_hits} runs reached τ̄",
                log.runs.len()
            ),
        ),
    }
}

fn check_generic_equivalence() -> CheckOutcome {
    const NAME: &str = "specialized vs generic 4-block iterates";
    const SIZES: [usize; 5] = [6, 9, 12, 15, 15];
    let mut worst = 0.0f64;
    for (seed, &n) in SIZES.iter().enumerate() {
        let run = || -> Result<f64> {
            let prob = build_ext_biq(&random_biq(n, seed as u64), &ExtBiqOptions::default())?;
            let cfg = default_config(&prob);
            let gp = to_multiblock(&prob)?;
            let mut it = DnnSdpIterate::zeros(&prob, cfg.sigma, cfg.tau0);
            let mut gen = CorrectedAdmm::with_state(&gp, cfg.clone(), to_generic_state(&it, &gp))?;
            let mut diff = 0.0f64;
            for _ in 0..ENGINE_STEPS {
                it = cadmm_step(&it, &prob, &cfg)?.0;
                gen.step()?;
                let a = to_generic_state(&it, &gp);
                let b = gen.state();
                let d = |u: &[DVector<f64>], v: &[DVector<f64>]| {
                    u.iter().zip(v).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
                };
                diff = diff
                    .max(d(&a.z, &b.z))
                    .max(d(&a.z_tilde, &b.z_tilde))
                    .max((&a.x - &b.x).amax())
                    .max((a.tau - b.tau).abs());
            }
            Ok(diff)
        };
        match run() {
            Ok(d) => worst = worst.max(d),
            Err(e) => return CheckOutcome::error(4, NAME, format!("n = {n}: {e}")),
        }
    }
    CheckOutcome::new(
        4,
        NAME,
        worst <= 1e-10,
        format!("max entrywise difference {worst:.2e} over 5 extended BIQ instances × {ENGINE_STEPS} steps (σ fixed)"),
    )
}

/// Dense `m × n²` matrix of a constraint list on column-major flattened
/// matrices, built entry by entry.
fn dense_constraints(a: &SparseSymList) -> DMatrix<f64> {
    let n = a.n();
    let mut d = DMatrix::zeros(a.len(), n * n);
    for (k, mat) in a.mats().iter().enumerate() {
        for &(i, j, v) in &mat.entries {
            d[(k, i + j * n)] += v;
            if i != j {
                d[(k, j + i * n)] += v;
            }
        }
    }
    d
}

fn vec_of(m: &SymMat) -> DVector<f64> {
    let n = m.n();
    DVector::from_fn(n * n, |k, _| m.get(k % n, k / n))
}

fn random_sym(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> SymMat {
    SymMat::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

/// Projection onto `𝕊₊ⁿ` of a dense matrix via its own eigendecomposition.
fn psd_part(v: &DVector<f64>, n: usize) -> DVector<f64> {
    let m = DMatrix::from_column_slice(n, n, v.as_slice());
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let lam = eig.eigenvalues.map(|l| l.max(0.0));
    let p = &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose();
    DVector::from_column_slice(p.as_slice())
}

const PG_ITERS: usize = 200;

fn check_subproblem_oracles() -> CheckOutcome {
    const NAME: &str = "block updates vs literal-objective oracles";
    let run = || -> Result<[f64; 4]> {
        let mut worst = [0.0f64; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
        let rel = |a: &DVector<f64>, b: &DVector<f64>| (a - b).norm() / (1.0 + b.norm());
        for state in 0..20u64 {
            let sigma = 10f64.powf(rng.gen_range(-1.0..1.0));
            // y_I on an extended BIQ instance
            let prob = build_ext_biq(&random_biq(5, state), &ExtBiqOptions::default())?;
            let n = prob.n();
            let q = prob.ineq().expect("extended BIQ has inequalities");
            let lambda = prob.lambda_i().expect("cached λ");
            let ai = dense_constraints(&q.a);
            let x = random_sym(n, 2.0, &mut rng);
            let r = random_sym(n, 2.0, &mut rng);
            let yt = DVector::from_fn(q.a.len(), |_, _| rng.gen_range(-1.0..1.0));
            let (xv, rv) = (vec_of(&x), vec_of(&r));
            let got = update_y_i(&prob, &yt, &x, &r, sigma)?;
            // f(y) = −⟨b, y⟩ + ⟨X, 𝒜*y⟩ + (σ/2)‖𝒜*y + r‖² + (σ/2)‖y − ỹ‖²_{λI − 𝒜𝒜*}
            let grad = |y: &DVector<f64>| {
                let d = y - &yt;
                -&q.b + &ai * &xv + (&ai * (ai.tr_mul(y) + &rv)) * sigma + (&d * lambda - &ai * ai.tr_mul(&d)) * sigma
            };
            let mut y = yt.map(|v| v.max(0.0));
            for _ in 0..PG_ITERS {
                y = (&y - grad(&y) / (2.0 * sigma * lambda)).map(|v| v.max(0.0));
            }
            worst[0] = worst[0].max(rel(&got, &y));

            // Z on a FAP instance (mixed pattern) with a nonzero shift
            let prob = generate(Family::Fap, 6, state)?;
            let n = prob.n();
            let x = random_sym(n, 2.0, &mut rng);
            let r = random_sym(n, 2.0, &mut rng);
            let got = vec_of(&update_z(&prob, &x, &r, sigma));
            let (xv, rv, mv) = (vec_of(&x), vec_of(&r), vec_of(prob.shift()));
            let proj = |v: &DVector<f64>| {
                DVector::from_fn(n * n, |k, _| match prob.pattern().kind(k % n, k / n) {
                    EntryKind::Free => 0.0,
                    EntryKind::NonNeg => v[k].max(0.0),
                    EntryKind::Zero => v[k],
                })
            };
            let mut z = DVector::zeros(n * n);
            for _ in 0..PG_ITERS {
                let g = &xv - &mv + (&z + &rv) * sigma;
                z = proj(&(&z - g / (2.0 * sigma)));
            }
            worst[1] = worst[1].max(rel(&got, &z));

            // y_E on a BIQ instance: the gradient of the literal objective
            // vanishes and the dense normal equations agree
            let prob = build_biq(&random_biq(6, state))?;
            let n = prob.n();
            let ae = dense_constraints(prob.a_e());
            let x = random_sym(n, 2.0, &mut rng);
            let r = random_sym(n, 2.0, &mut rng);
            let (xv, rv) = (vec_of(&x), vec_of(&r));
            let got = update_y_e(&prob, &x, &r, sigma);
            let g = -prob.b_e() + &ae * &xv + (&ae * (ae.tr_mul(&got) + &rv)) * sigma;
            let scale = 1.0 + prob.b_e().norm() + (&ae * &xv).norm() + sigma * (&ae * &rv).norm();
            let direct = (&ae * ae.transpose() * sigma)
                .lu()
                .solve(&(prob.b_e() - &ae * &xv - &ae * &rv * sigma))
                .expect("𝒜_E is surjective");
            worst[2] = worst[2].max(g.norm() / scale).max(rel(&got, &direct));

            // S: projected gradient plus the cone complementarity certificate
            let n = 7;
            let x = random_sym(n, 2.0, &mut rng);
            let r = random_sym(n, 2.0, &mut rng);
            let (xv, rv) = (vec_of(&x), vec_of(&r));
            let got = vec_of(&update_s(&x, &r, sigma)?);
            let mut s = DVector::zeros(n * n);
            for _ in 0..PG_ITERS {
                let g = &xv + (&s + &rv) * sigma;
                s = psd_part(&(&s - g / (2.0 * sigma)), n);
            }
            let grad = (&xv + (&got + &rv) * sigma) / sigma;
            let min_eig = |v: &DVector<f64>| SymmetricEigen::new(DMatrix::from_column_slice(n, n, v.as_slice())).eigenvalues.min();
            let cert = (-min_eig(&got)).max(-min_eig(&grad)).max(got.dot(&grad).abs()).max(0.0) / (1.0 + got.norm());
            worst[3] = worst[3].max(rel(&got, &s)).max(cert);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => CheckOutcome::new(
            5,
            NAME,
            w.iter().all(|&v| v <= 1e-8),
            format!(
                "max relative error over 20 states: y_I {:.1e}, Z {:.1e}, y_E {:.1e}, S {:.1e} (limit 1e-8)",
                w[0], w[1], w[2], w[3]
            ),
        ),
        Err(e) => CheckOutcome::error(5, NAME, e),
    }
}

/// Corrected solve with τ history recorded into `log`; returns the result
/// and whether `y_I ≥ 0` held at every iterate.
fn logged_solve(
    label: &str,
    prob: &DnnSdpProblem,
    log: &mut TauLog,
) -> Result<(crate::dnnsdp::DnnSolveResult, bool)> {
    logged_solve_with(label, prob, SolverConfig { record_history: true, ..default_config(prob) }, log)
}

fn logged_solve_with(
    label: &str,
    prob: &DnnSdpProblem,
    cfg: SolverConfig,
    log: &mut TauLog,
) -> Result<(crate::dnnsdp::DnnSolveResult, bool)> {
    let mut y_nonneg = true;
    let res = cadmm_solve_observed(prob, &cfg, &TuningPolicy::default(), &mut |it| {
        if let Some(y) = &it.y_i {
            y_nonneg &= y.iter().all(|&v| v >= 0.0);
        }
    })?;
    log.runs.push(TauRun {
        label: label.to_string(),
        tau: res.history.tau.clone(),
        restarts: res.restarts.clone(),
        tau_bar: cfg.tau_bar,
        tau0: cfg.tau0,
    });
    Ok((res, y_nonneg))
}

pub const CERTIFICATE_SEEDS: u64 = 3;

fn check_certificates(log: &mut TauLog) -> CheckOutcome {
    const NAME: &str = "3-block solves reach η < 1e-6 within 20000 iterations";
    let cases = [(Family::Biq, 20), (Family::ThetaPlus, 20), (Family::Rcp, 20), (Family::Fap, 10)];
    let mut lines = Vec::new();
    let mut ok = true;
    for (family, n) in cases {
        for seed in 0..CERTIFICATE_SEEDS {
            let spec = GenSpec { family, n, seed };
            let label = spec.to_string();
            let res = generate(family, n, seed).and_then(|p| logged_solve(&label, &p, log));
            match res {
                Ok((r, _)) => {
                    let pass = r.status == SolveStatus::Converged
                        && r.report.eta < 1e-6
                        && r.iterations <= 20_000
                        && r.elapsed_secs < 60.0;
                    ok &= pass;
                    lines.push(format!("{label}: {} it, η {:.1e}, {:.2} s", r.iterations, r.report.eta, r.elapsed_secs));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{label}: error {e}"));
                }
            }
        }
    }
    CheckOutcome::new(6, NAME, ok, lines.join("; "))
}

fn check_theta_values(log: &mut TauLog) -> CheckOutcome {
    const NAME: &str = "θ₊(Kₙ) = 1 and θ₊(empty) = n";
    let mut ok = true;
    let mut lines = Vec::new();
    for n in [5usize, 10] {
        for (graph, target, tol, what) in
            [(Graph::complete(n), 1.0, 1e-5, "K"), (Graph::empty(n), n as f64, 1e-4 * n as f64, "empty")]
        {
            let label = format!("{what}{n}");
            match build_theta_plus(&graph).and_then(|p| logged_solve(&label, &p, log)) {
                Ok((r, _)) => {
                    let err = (r.objective - target).abs();
                    ok &= r.status == SolveStatus::Converged && err <= tol;
                    lines.push(format!("{label}: {:.7} (error {err:.1e}, limit {tol:.0e})", r.objective));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{label}: error {e}"));
                }
            }
        }
    }
    CheckOutcome::new(7, NAME, ok, lines.join("; "))
}

/// Tolerance for the relaxation-bound check. At η < 1e-6 the objective of a
/// tight instance with |value| ≈ 50 can sit ~1e-4 above the optimum, which
/// is accuracy, not a wrong bound, so this check solves more accurately.
pub const RELAXATION_TOL: f64 = 1e-8;

fn check_relaxation_bound(log: &mut TauLog) -> CheckOutcome {
    const NAME: &str = "BIQ relaxation ≤ brute-force optimum (n = 10)";
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    let mut min_margin_default = f64::INFINITY;
    let mut detail = Vec::new();
    for seed in 0..10 {
        let d = random_biq(10, seed);
        let label = format!("biq:10:{seed}");
        let res = brute_force_biq(&d).and_then(|best| {
            let p = build_biq(&d)?;
            let coarse = logged_solve(&label, &p, log)?.0;
            let cfg = SolverConfig { tol: RELAXATION_TOL, max_iters: 200_000, record_history: true, ..default_config(&p) };
            Ok((best, coarse, logged_solve_with(&label, &p, cfg, log)?.0))
        });
        match res {
            Ok((best, coarse, r)) => {
                let margin = best - r.objective;
                min_margin = min_margin.min(margin);
                min_margin_default = min_margin_default.min(best - coarse.objective);
                if r.status != SolveStatus::Converged || r.objective > best + 1e-5 {
                    ok = false;
                    detail.push(format!("seed {seed}: bound {} vs optimum {best} ({:?})", r.objective, r.status));
                }
            }
            Err(e) => {
                ok = false;
                detail.push(format!("seed {seed}: error {e}"));
            }
        }
    }
    detail.insert(
        0,
        format!(
            "10 instances solved to η < {RELAXATION_TOL:.0e}: min (optimum − bound) = {min_margin:.3e} \
             (at η < 1e-6 it is {min_margin_default:.3e})"
        ),
    );
    CheckOutcome::new(8, NAME, ok, detail.join("; "))
}

fn check_extended_biq(log: &mut TauLog) -> CheckOutcome {
    const NAME: &str = "4-block extended BIQ (n = 15) within 40000 iterations";
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 0..CERTIFICATE_SEEDS {
        let label = format!("extbiq:15:{seed}");
        match generate(Family::ExtBiq, 15, seed).and_then(|p| logged_solve(&label, &p, log)) {
            Ok((r, y_nonneg)) => {
                let comps = r.report.components();
                let worst = comps.iter().map(|c| c.1).fold(0.0, f64::max);
                let pass = r.status == SolveStatus::Converged
                    && comps.len() == 10
                    && worst < 1e-6
                    && r.iterations <= 40_000
                    && y_nonneg;
                ok &= pass;
                lines.push(format!(
                    "{label}: {} it, max of {} components {worst:.1e}, y_I ≥ 0 throughout: {y_nonneg}, {:.1} s",
                    r.iterations,
                    comps.len(),
                    r.elapsed_secs
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("{label}: error {e}"));
            }
        }
    }
    CheckOutcome::new(9, NAME, ok, lines.join("; "))
}

/// The ten-problem manifest used by the profile check.
pub fn small_manifest() -> Manifest {
    let specs = [
        "biq:10:0", "biq:10:1", "biq:12:2", "extbiq:6:0", "theta:12:0", "theta:12:1", "rcp:12:0", "fap:8:0", "fap:8:1",
        "qap:3:0",
    ];
    Manifest {
        problems: specs.iter().map(|s| ProblemSource { generate: Some(s.to_string()), ..Default::default() }).collect(),
        solvers: vec![
            SolverSpec::new(SolverKind::Cadmm),
            SolverSpec { kind: SolverKind::Dext, tau: Some(1.618), name: None },
        ],
        config: ConfigOverrides::default(),
        policy: TuningPolicy::default(),
    }
}

fn check_profiles() -> CheckOutcome {
    const NAME: &str = "bench profiles over 10 instances, cadmm vs dext(1.618)";
    let out = match run_bench(&small_manifest(), std::path::Path::new(".")) {
        Ok(o) => o,
        Err(e) => return CheckOutcome::error(10, NAME, e),
    };
    let mut ok = true;
    let mut lines = Vec::new();
    for prof in [&out.iterations, &out.time] {
        ok &= prof.curves.len() == 2;
        for c in &prof.curves {
            let solved = out.records.iter().filter(|r| r.solver == c.solver && r.solved()).count() as f64
                / prof.problems.len() as f64;
            let monotone = c.y.windows(2).all(|w| w[0] <= w[1]) && c.x.windows(2).all(|w| w[0] < w[1]);
            let ends = (c.y.last().copied().unwrap_or(f64::NAN) - solved).abs() < 1e-15;
            ok &= monotone && ends && c.x[0] == 1.0 && c.area().is_finite() && c.solve_fraction == solved;
        }
    }
    for c in &out.iterations.curves {
        let wins = c.ratios.iter().filter(|&&r| r == 1.0).count();
        lines.push(format!(
            "{} solved {}/{}, fewest iterations on {wins}",
            c.solver,
            c.ratios.iter().filter(|r| r.is_finite()).count(),
            c.ratios.len()
        ));
    }
    CheckOutcome::new(10, NAME, ok, format!("curves nondecreasing and end at solve fractions; {}", lines.join("; ")))
}

/// Reference rows from the published comparison, reported for context.
pub const REFERENCE_ROWS: &str = "published reference rows: theta4 311 iterations, τ 1.84, η 9.9e-7; \
     be100.1 1670 iterations. Not reproduced here: instance sets, σ strategy and restarts differ.";

fn reference_rows() -> CheckOutcome {
    CheckOutcome {
        id: 11,
        name: "reference rows (informational)",
        passed: true,
        informational: true,
        detail: REFERENCE_ROWS.into(),
    }
}

/// Runs the requested checks and returns their outcomes sorted by id.
/// Check 3 audits the τ sequences of the other solves; run alone, it first
/// runs checks 6 and 7 to collect them.
pub fn run_checks(ids: &[u8]) -> Vec<CheckOutcome> {
    let mut log = TauLog::default();
    let mut out = Vec::new();
    let wants = |id: u8| ids.contains(&id);
    for &id in &[1u8, 2, 4, 5, 6, 7, 8, 9, 10, 11] {
        if !wants(id) {
            continue;
        }
        log::info!("running check {id}");
        out.push(match id {
            1 => check_correction_identity(&mut log),
            2 => check_g_positive_definite(),
            4 => check_generic_equivalence(),
            5 => check_subproblem_oracles(),
            6 => check_certificates(&mut log),
            7 => check_theta_values(&mut log),
            8 => check_relaxation_bound(&mut log),
            9 => check_extended_biq(&mut log),
            10 => check_profiles(),
            _ => reference_rows(),
        });
    }
    if wants(3) {
        if log.runs.is_empty() {
            check_certificates(&mut log);
            check_theta_values(&mut log);
        }
        out.push(check_tau_law(&log));
    }
    out.sort_by_key(|o| o.id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(tau: Vec<f64>, restarts: Vec<usize>) -> TauRun {
        TauRun { label: "t".into(), tau, restarts, tau_bar: 0.1, tau0: 1.95 }
    }

    #[test]
    fn tau_law_accepts_valid_sequences() {
        assert!(tau_law_violation(&run(vec![1.95, 1.5, 1.5, 0.1, 0.1], vec![])).is_none());
        // reset after iteration 2 (entry 2 starts a new segment)
        assert!(tau_law_violation(&run(vec![1.95, 1.2, 1.9, 1.8], vec![2])).is_none());
    }

    #[test]
    fn tau_law_flags_violations() {
        assert!(tau_law_violation(&run(vec![1.5, 1.6], vec![])).unwrap().contains("rose"));
        assert!(tau_law_violation(&run(vec![1.5, 0.05], vec![])).unwrap().contains("outside"));
        assert!(tau_law_violation(&run(vec![2.0], vec![])).is_some());
    }

    #[test]
    fn dense_instances_respect_the_size_limit() {
        for seed in 0..ENGINE_INSTANCES {
            let p = random_dense_problem(seed).unwrap();
            assert!((3..=5).contains(&p.num_blocks()));
            let total: usize = p.blocks().iter().map(|b| b.dim()).sum();
            assert!(total <= 100);
        }
    }

    #[test]
    fn outcome_lines() {
        let o = CheckOutcome::new(4, "x", false, "d".into());
        assert_eq!(o.line(), "FAIL [ 4] x: d");
        assert!(reference_rows().line().starts_with("INFO [11]"));
    }
}
