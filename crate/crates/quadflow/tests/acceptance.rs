//! Full verification suite, one line per criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the report.

use quadflow::verify::{run_all, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let report = run_all(DEFAULT_SEED, true);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failures: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.line())
        .collect();
    assert!(
        failures.is_empty(),
        "failed criteria:\n{}",
        failures.join("\n")
    );
}
