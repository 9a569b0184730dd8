//! End-to-end acceptance gate: every headline numeric claim the toolkit
//! makes, checked at its stated tolerance. Each criterion prints one
//! PASS/FAIL line so a failing run shows the full scoreboard before the
//! assertion fires.

#[test]
fn acceptance_suite() {
    let results = eland::suite::primary_suite();
    let mut failures = Vec::new();
    for c in &results {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", c.name, c.detail);
        if !c.passed {
            failures.push(c.name);
        }
    }
    assert!(
        failures.is_empty(),
        "{} of {} criteria failed: {:?}",
        failures.len(),
        results.len(),
        failures
    );
}
