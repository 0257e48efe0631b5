use std::path::Path;

use cadmm::bench::{run_bench, Manifest};
use cadmm::io::read_records;

const MANIFEST: &str = r#"{
  "problems": [
    {"generate": "biq:8:0"}, {"generate": "biq:8:1"}, {"generate": "theta:7:0"},
    {"generate": "theta:7:1"}, {"generate": "rcp:8:0"}, {"generate": "rcp:8:1"},
    {"generate": "fap:6:0"}, {"generate": "fap:6:1"}, {"generate": "extbiq:5:0"},
    {"generate": "qap:3:0"}
  ],
  "solvers": [{"kind": "cadmm"}, {"kind": "dext", "tau": 1.618}],
  "max_iters": 20000
}"#;

#[test]
fn ten_problem_manifest_produces_records_and_profiles() {
    let m = Manifest::parse(MANIFEST).unwrap();
    let out = run_bench(&m, Path::new(".")).unwrap();
    assert_eq!(out.records.len(), 20);
    // problem-major order
    for pair in out.records.chunks(2) {
        assert_eq!(pair[0].problem, pair[1].problem);
        assert_eq!((pair[0].solver.as_str(), pair[1].solver.as_str()), ("cadmm", "dext"));
    }
    for prof in [&out.iterations, &out.time] {
        assert_eq!(prof.problems.len(), 10);
        for c in &prof.curves {
            assert!(c.y.windows(2).all(|w| w[0] <= w[1]));
            assert!(c.y.iter().all(|&y| (0.0..=1.0).contains(&y)));
            assert_eq!(*c.y.last().unwrap(), c.solve_fraction);
            assert!(c.ratios.iter().all(|&r| r >= 1.0));
        }
        // every solved problem has at least one solver at ratio one
        for k in 0..10 {
            let best = prof.curves.iter().map(|c| c.ratios[k]).fold(f64::INFINITY, f64::min);
            assert!(best == 1.0 || best == f64::INFINITY);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    assert_eq!(read_records(dir.path().join("records.json")).unwrap(), out.records);
    let csv = std::fs::read_to_string(dir.path().join("profile_iterations.csv")).unwrap();
    assert!(csv.starts_with("solver,x,y\n"));
    assert!(std::fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("cadmm"));
}

#[test]
fn manifest_errors_are_reported() {
    assert!(Manifest::parse(r#"{"problems": [], "solvers": [], "bogus": 1}"#).is_err());
    let m = Manifest::parse(r#"{"problems": [], "solvers": [{"kind": "cadmm"}]}"#).unwrap();
    assert!(run_bench(&m, Path::new(".")).is_err());
    let two = Manifest::parse(r#"{"problems": [{"generate": "biq:4:0", "problem": "x.json"}], "solvers": [{"kind": "cadmm"}]}"#).unwrap();
    assert!(run_bench(&two, Path::new(".")).is_err());
    // partial policies fill in defaults; misspelled keys are rejected
    let partial = Manifest::parse(r#"{"problems": [{"generate": "biq:4:0"}], "solvers": [{"kind": "cadmm"}], "policy": {"check_period": 10}}"#).unwrap();
    assert_eq!(partial.policy.check_period, 10);
    assert!(partial.policy.sigma_tuning);
    assert!(Manifest::parse(r#"{"problems": [], "solvers": [], "policy": {"sigma_tunning": false}}"#).is_err());
}
