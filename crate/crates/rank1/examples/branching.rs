//! Restriction of SO(n) types to SO(n−1): interlacing weights, dimensions and Casimir gaps.

use rank1::repn_catalog::{branch_k_to_m, km_casimir_gap, HighestWeight};
use rank1::spectral_counting::weyl_dimension;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5;
    let tau = HighestWeight::from_ints(&[2, 1], n)?;
    let etas = branch_k_to_m(&tau, n)?;
    let total: u64 = etas.iter().map(|e| weyl_dimension(e).unwrap_or(0)).sum();
    println!("τ = {:?}: dim {} = Σ dim η = {total}", tau.coords(), weyl_dimension(&tau)?);
    for eta in &etas {
        println!("  η = {:?}, gap {}", eta.coords(), km_casimir_gap(&tau, eta, n)?);
    }
    Ok(())
}
