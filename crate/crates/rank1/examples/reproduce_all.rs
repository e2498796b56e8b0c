//! Runs the nine acceptance criteria and prints one line each.

use rank1::cli::suite::run_all;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for o in run_all(seed) {
        println!("{}", o.line());
    }
}
