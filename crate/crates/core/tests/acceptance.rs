//! Acceptance gate: every criterion runs at full size, one line per outcome.
//!
//! The criteria run sequentially inside a single test so that the wall-clock
//! limits some of them carry are not distorted by other tests sharing the CPU.

use satnav_search::suite::{self, SuiteOptions};

#[test]
fn acceptance_criteria() {
    let outcomes = suite::run_all(SuiteOptions { quick: false });
    for outcome in &outcomes {
        println!("{outcome}");
    }
    assert_eq!(outcomes.len(), 10);
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
