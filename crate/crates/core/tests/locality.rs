#[path = "suites/locality.rs"]
mod suite;

#[test]
fn masking_out_of_range_content_changes_nothing() {
    let out = suite::run(99, 1000);
    assert!(out.robots_checked > 5000, "only {} robots checked", out.robots_checked);
    assert!(
        out.violations.is_empty(),
        "{} violations, first: {:?}",
        out.violations.len(),
        out.violations.first()
    );
}
