//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use symtoep_cli::verify::{run_suite, Suite, VerifyOptions};

fn main() -> ExitCode {
    let start = Instant::now();
    let report = run_suite(Suite::All, &VerifyOptions::default());
    for outcome in &report.outcomes {
        println!("{}", outcome.summary_line());
        for line in &outcome.evidence {
            println!("       {line}");
        }
    }
    let failed: Vec<u8> = report.outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert_eq!(report.outcomes.len(), 11, "every criterion runs");
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        report.outcomes.len() - failed.len(),
        report.outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() && report.passed {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
