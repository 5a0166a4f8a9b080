//! Acceptance battery, one line per criterion. Runs without the libtest harness so the
//! lines show up in plain `cargo test` output.

use std::process::ExitCode;

use fillin_core::validation::{run_suite, SuiteOptions, CRITERIA};

fn main() -> ExitCode {
    let report = run_suite(&SuiteOptions::default());
    println!("acceptance: {} criteria", CRITERIA.len());
    for (k, name) in CRITERIA.iter().enumerate() {
        let id = k + 1;
        let ok = report.criterion_pass(id).unwrap_or(false);
        println!("criterion {id:>2} {name:<27} {}", if ok { "PASS" } else { "FAIL" });
    }
    for r in report.failing() {
        println!("  failing: {} / {}: measured {:e}, tolerance {:e} {:?}", r.name, r.check, r.measured, r.tolerance, r.detail);
    }

    // stress mode tightens tolerances; failures must come back as rows, not panics
    let stressed = run_suite(&SuiteOptions { stress: 0.01, filter: Some("schwarzschild".into()), ..Default::default() });
    let stress_ok = !stressed.rows.is_empty() && stressed.rows.iter().all(|r| r.criterion == 1);
    println!("stress x0.01 on flow oracle: {} rows, {} failing", stressed.rows.len(), stressed.failing().len());

    if report.pass() && stress_ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
