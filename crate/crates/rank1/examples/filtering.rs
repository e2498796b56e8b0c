//! Removes plus-branch coefficients excluded by the decay rate ν.

use rank1::ode_expansion::{expand_iterated, filter_coefficients, GeometricTheta, OdeParams, SwitchTable};
use rank1::{C64, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = OdeParams::from_discriminant(7, 4.0, Q::from_integer(0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    let ell = SwitchTable::for_params(&p).ell_plus + 1;
    let report = expand_iterated(&p, &GeometricTheta::halving(), ell)?;
    for nu in [0.0, 0.5, 1.5] {
        let f = filter_coefficients(&report, nu, &p)?;
        let removed: Vec<u32> = f.removed.iter().map(|k| k.m).collect();
        println!("ν = {nu}: removed plus indices {removed:?}, {} coefficients kept", f.coeffs.len());
    }
    Ok(())
}
