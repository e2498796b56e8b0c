//! Runs the nine acceptance criteria with the default seed and prints one line each.

use rank1::cli::suite::run_all;

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(0);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert_eq!(outcomes.len(), 9);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
