//! End-to-end acceptance gate: run the complete verification battery with
//! default cap and seed, print one pass/fail line per criterion, and hold
//! the heavy checks to their time budgets.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use latcoh::report::CheckStatus;
use latcoh::verify::{run_battery, CRITERION_TITLES, MANIFEST};
use latcoh::{DEFAULT_CAP, DEFAULT_SEED};

#[test]
fn acceptance_battery() {
    let started = Instant::now();
    let report = run_battery(DEFAULT_CAP, DEFAULT_SEED, None);
    assert_eq!(
        report.checks.len(),
        MANIFEST.len(),
        "battery must run every manifest check"
    );

    let mut all_ok = true;
    for (idx, title) in CRITERION_TITLES.iter().enumerate() {
        let criterion = idx + 1;
        let names: Vec<&str> = MANIFEST
            .iter()
            .filter(|s| s.criterion == criterion)
            .map(|s| s.name)
            .collect();
        let mine: Vec<_> = report
            .checks
            .iter()
            .filter(|c| names.contains(&c.name.as_str()))
            .collect();
        let ok = !mine.is_empty() && mine.iter().all(|c| c.status == CheckStatus::Pass);
        let millis: u128 = mine.iter().map(|c| c.millis).sum();
        println!(
            "criterion {criterion:2}: {} - {title} ({} checks, {millis} ms)",
            if ok { "pass" } else { "FAIL" },
            mine.len(),
        );
        all_ok &= ok;
    }
    for c in &report.checks {
        if c.status != CheckStatus::Pass {
            println!(
                "  failing check {}: computed {}; expected {}",
                c.name, c.computed, c.expected
            );
        }
    }
    assert!(all_ok, "acceptance criteria failed:\n{}", report.body_json());

    let ms = |name: &str| -> u128 {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.millis)
            .unwrap_or(0)
    };
    let criterion_ms = |n: usize| -> u128 {
        MANIFEST
            .iter()
            .filter(|s| s.criterion == n)
            .map(|s| ms(s.name))
            .sum()
    };
    assert!(ms("delpezzo3.det") < 1_000, "determinant budget exceeded");
    assert!(ms("weyl.orders_enumerated") < 60_000, "enumeration budget exceeded");
    assert!(criterion_ms(3) < 180_000, "Sylow-3 cohomology budget exceeded");
    assert!(criterion_ms(8) < 60_000, "conic-bundle budget exceeded");
    assert!(started.elapsed().as_secs() < 300, "total battery budget exceeded");
}
