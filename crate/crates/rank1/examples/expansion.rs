//! Iterated expansion for n = 5, D = −1: remainder decay improves with the truncation order.

use rank1::ode_expansion::{expand_iterated, GeometricTheta, OdeParams, SwitchTable};
use rank1::{C64, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = OdeParams::from_discriminant(5, -1.0, Q::from_integer(0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    let switch = SwitchTable::for_params(&p);
    println!("switch table: {switch:?}");
    for ell in switch.ell_plus + 1..=7 {
        let r = expand_iterated(&p, &GeometricTheta::halving(), ell)?;
        println!(
            "ℓ={ell}: {} coefficients, fitted decay {:.3}, identity residual {:.1e}",
            r.coeffs.len(),
            r.fitted_decay,
            r.identity_residual
        );
    }
    Ok(())
}
