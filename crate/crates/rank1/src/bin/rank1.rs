//! Command-line entry point.

use std::io::Write;

fn main() {
    if let Some(n) = std::env::var("RANK1_NUM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Ignored if the global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = rank1::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.exit_code);
}
