//! Dyadic partial sums of a planted spectrum on both sides of the critical exponent.

use rank1::spectral_counting::{summability_report, SyntheticSpectrum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpectrum::planted(2.0, 30);
    for s in [-3.0, -2.5, -2.0, -1.5] {
        let r = summability_report(&spec, s, 30)?;
        println!(
            "s = {s}: last partial sum {:.4e}, ratio {:.4}, converges {}",
            r.partial_sums.last().copied().unwrap_or(0.0),
            r.last_ratio.unwrap_or(f64::NAN),
            r.converges
        );
    }
    Ok(())
}
