//! Acceptance run: every suite at full size, one verdict line per criterion,
//! followed by the failing reports of any failing suite. Runs without the
//! libtest harness so that the verdicts are always printed.

use walsh_spider::suites::{run_suite, Suite, SuiteOptions};

const SEED: u64 = 20_240_611;

fn main() -> std::process::ExitCode {
    let mut failed = Vec::new();
    for (i, suite) in Suite::ALL.into_iter().enumerate() {
        let started = std::time::Instant::now();
        let verdict = match run_suite(suite, SuiteOptions::new(SEED)) {
            Ok(outcome) => {
                let bad: Vec<String> = outcome.failures().map(|r| r.to_string()).collect();
                if bad.is_empty() {
                    Ok(outcome.reports.len())
                } else {
                    Err(bad.join("\n    "))
                }
            }
            Err(e) => Err(format!("suite error: {e}")),
        };
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(n) => println!(
                "PASS criterion {} ({suite}): {n} checks in {secs:.1}s",
                i + 1
            ),
            Err(detail) => {
                println!(
                    "FAIL criterion {} ({suite}) in {secs:.1}s\n    {detail}",
                    i + 1
                );
                failed.push(suite.name());
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", Suite::ALL.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
