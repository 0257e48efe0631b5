//! Acceptance suite: runs every numbered criterion and prints one
//! PASS/FAIL line each. Criterion 11 compares against published reference
//! rows that cannot be reproduced here, so it is reported as INFO only.

use std::io::Write;

use cadmm::checks::{run_checks, ALL_CHECKS};

#[test]
fn acceptance_criteria() {
    let outcomes = run_checks(&ALL_CHECKS);
    assert_eq!(outcomes.len(), ALL_CHECKS.len());
    // written past the test harness capture so the lines always show up
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err);
    for o in &outcomes {
        let _ = writeln!(err, "{}", o.line());
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed && !o.informational).map(|o| o.line()).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
