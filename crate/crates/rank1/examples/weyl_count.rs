//! Growth exponent of the K-type count below a Casimir threshold.

use rank1::spectral_counting::{branching_count_s, log_grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = log_grid(1e2, 1e4, 9);
    for n in [3usize, 4, 5] {
        let r = branching_count_s(n, &grid, 1)?;
        println!(
            "SO({n}): fitted {:.3}, target {}, counts {:?}",
            r.fitted_exponent.unwrap_or(f64::NAN),
            r.target_exponent,
            r.counts
        );
    }
    Ok(())
}
