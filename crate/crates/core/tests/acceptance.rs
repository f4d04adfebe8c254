//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::thread;

use ehcr_core::validation::{run_criterion, ValidationOptions, CRITERIA};

fn main() -> ExitCode {
    let opts = ValidationOptions::default();
    let reports: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = CRITERIA
            .iter()
            .map(|&id| s.spawn(move || run_criterion(id, &opts).expect("known criterion")))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
