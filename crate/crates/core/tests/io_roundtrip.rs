use std::collections::BTreeMap;

use cadmm::bench::{run_one, SolverKind, SolverSpec};
use cadmm::dnnsdp::{cadmm_solve, default_config, TuningPolicy};
use cadmm::engine::SolverConfig;
use cadmm::io::{parse_problem, parse_record, problem_to_string, read_problem, record_to_string, write_problem, RunRecord};
use cadmm::problems::{generate, Family};

const FAMILIES: [(Family, usize); 6] =
    [(Family::Biq, 6), (Family::ExtBiq, 5), (Family::ThetaPlus, 7), (Family::Rcp, 8), (Family::Fap, 6), (Family::Qap, 3)];

#[test]
fn fifty_random_instances_survive_a_round_trip() {
    for k in 0..50u64 {
        let (family, n) = FAMILIES[k as usize % FAMILIES.len()];
        let p = generate(family, n + (k as usize / 6) % 3, k).unwrap();
        let text = problem_to_string(&p, BTreeMap::new()).unwrap();
        let q = parse_problem(&text).unwrap();
        assert_eq!(q.c(), p.c(), "instance {k}");
        assert_eq!(q.a_e(), p.a_e());
        assert_eq!(q.b_e(), p.b_e());
        assert_eq!(q.ineq(), p.ineq());
        assert_eq!(q.shift(), p.shift());
        assert_eq!(q.pattern(), p.pattern());
        assert_eq!(q.objective(), p.objective());
        // serialization is canonical
        assert_eq!(problem_to_string(&q, BTreeMap::new()).unwrap(), text);
    }
}

#[test]
fn problem_files_on_disk_solve_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta.json");
    let p = generate(Family::ThetaPlus, 8, 3).unwrap();
    write_problem(&p, [("name".to_string(), "theta".to_string())].into(), &path).unwrap();
    let q = read_problem(&path).unwrap();
    let cfg = default_config(&p);
    let a = cadmm_solve(&p, &cfg, &TuningPolicy::default()).unwrap();
    let b = cadmm_solve(&q, &cfg, &TuningPolicy::default()).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.objective, b.objective);
}

#[test]
fn records_are_deterministic_apart_from_timing() {
    let p = generate(Family::Biq, 10, 4).unwrap();
    let cfg = SolverConfig { max_iters: 5000, ..default_config(&p) };
    for kind in [SolverKind::Cadmm, SolverKind::Dext] {
        let spec = SolverSpec::new(kind);
        let a = run_one("biq", &p, &spec, &cfg, &TuningPolicy::default());
        let b = run_one("biq", &p, &spec, &cfg, &TuningPolicy::default());
        assert_eq!(a.without_timing(), b.without_timing());
        let back: RunRecord = parse_record(&record_to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }
}

#[test]
fn failed_runs_keep_non_finite_fields() {
    let p = generate(Family::Biq, 6, 0).unwrap();
    let cfg = SolverConfig { max_iters: 1, ..default_config(&p) };
    let r = run_one("biq", &p, &SolverSpec::new(SolverKind::Cadmm), &cfg, &TuningPolicy::default());
    assert!(!r.solved());
    let back = parse_record(&record_to_string(&r).unwrap()).unwrap();
    assert_eq!(back.without_timing(), r.without_timing());
}
