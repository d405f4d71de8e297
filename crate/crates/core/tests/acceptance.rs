//! One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

use std::process::ExitCode;

use elkit_core::verify::{run_suite, VerifyOptions, SUITES};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for (k, suite) in SUITES.iter().enumerate() {
        let report = run_suite(suite, &opts).expect("known suite");
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {} ({suite}): {}", k + 1, report.summary());
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!("    {}: {}", c.check, c.detail);
        }
        if !report.passed() {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria passed", SUITES.len());
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
