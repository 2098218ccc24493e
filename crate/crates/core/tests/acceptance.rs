//! Acceptance criteria 1–11, one pass/fail line each.

use zerocap::regress::{run_criterion, CRITERIA, DEFAULT_SEED};
use zerocap::sdp::SolveOptions;

#[test]
fn acceptance_criteria() {
    let opts = SolveOptions::default();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let outcome = run_criterion(id, DEFAULT_SEED, &opts);
        println!("{}", outcome.line());
        for d in &outcome.details {
            println!("    {d}");
        }
        if !outcome.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
