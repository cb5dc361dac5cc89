//! One line per acceptance criterion; runs without the libtest harness so the
//! lines are printed even when every criterion passes.

use std::process::ExitCode;

use fracspec::suite::{run, SUITE_NAMES};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for name in SUITE_NAMES {
        let outcome = run(name).expect("known suite");
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(name);
        }
        if !outcome.within_budget {
            println!("     {name}: over its {:.0}s budget", outcome.budget);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", SUITE_NAMES.len(), SUITE_NAMES.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
