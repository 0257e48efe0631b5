use std::process::Command;

use cadmm::io::{read_problem, read_records, read_result};
use cadmm::SolveStatus;

fn cadmm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cadmm"))
}

#[test]
fn solve_generated_problem_writes_record_and_problem() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("run.json");
    let prob = dir.path().join("prob.json");
    let out = cadmm()
        .args(["solve", "--generate", "biq:10:7", "--out"])
        .arg(&rec)
        .arg("--save-problem")
        .arg(&prob)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("iter"), "{stdout}");
    let r = read_result(&rec).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    assert!(r.eta < 1e-6);

    // the saved problem solves again through --problem with the same result
    let rec2 = dir.path().join("run2.json");
    let out = cadmm().arg("solve").arg("--problem").arg(&prob).arg("--out").arg(&rec2).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r2 = read_result(&rec2).unwrap();
    assert_eq!(r2.iterations, r.iterations);
    assert_eq!(read_problem(&prob).unwrap().n(), 11);
}

#[test]
fn iteration_limit_and_usage_errors_have_distinct_codes() {
    let out = cadmm().args(["solve", "--generate", "biq:10:1", "--max-iters", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cadmm().args(["solve", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = cadmm().args(["solve", "--generate", "nope:3:1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = cadmm().args(["solve", "--generate", "biq:5:1", "--policy", "unknown=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = cadmm().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dext_solver_and_policy_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("d.json");
    let out = cadmm()
        .args(["solve", "--generate", "theta:8:2", "--solver", "dext", "--tau", "1.5", "--policy", "sigma_tuning=false", "--out"])
        .arg(&rec)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_result(&rec).unwrap();
    assert_eq!(r.solver, "dext");
    let cfg = r.config.unwrap();
    assert_eq!(cfg.dext_tau, Some(1.5));
    assert!(!cfg.policy.sigma_tuning);
    assert_eq!(r.sigma, 1.0);
}

#[test]
fn bench_from_manifest_and_from_records() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"{"problems": [{"generate": "biq:6:0"}, {"generate": "rcp:6:0"}], "solvers": [{"kind": "cadmm"}, {"kind": "dext"}]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cadmm().arg("bench").arg("--manifest").arg(&manifest).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(out_dir.join("records.json")).unwrap();
    assert_eq!(records.len(), 4);

    let again = dir.path().join("again");
    let out = cadmm().arg("bench").arg("--records").arg(out_dir.join("records.json")).arg("--out").arg(&again).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(again.join("profile_iterations.csv")).unwrap(),
        std::fs::read_to_string(out_dir.join("profile_iterations.csv")).unwrap()
    );
}

#[test]
fn check_subcommand_runs_selected_checks() {
    let out = cadmm().args(["check", "--only", "2,7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8_lossy(&out.stdout);
    assert_eq!(s.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{s}");
}
