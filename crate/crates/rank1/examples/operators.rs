//! Finite, tail and limit integral operators against quadrature.

use rank1::ode_expansion::quadrature::integrate;
use rank1::ode_expansion::{apply_difference, apply_j, apply_j_critical, ExpPoly, OdeParams, Sign, Variant};
use rank1::{C64, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = C64::new(1.0, 0.0);
    let p = OdeParams::from_discriminant(3, -1.0, Q::from_integer(0), one, C64::new(0.0, 0.0))?;
    let diff = apply_difference(2, Variant::Finite, &ExpPoly::constant(one), &p)?;
    let t = 1.0;
    let quad = integrate(
        |x| {
            (p.lambda_minus * t + (p.lambda_plus + 1.0) * x).exp()
                - (p.lambda_plus * t + (p.lambda_minus + 1.0) * x).exp()
        },
        0.0,
        t,
        1e-14,
    );
    println!("(J₂⁺ − J₂⁻)(1) at t=1: closed {:.12}, quadrature {:.12}", diff.eval(t), quad);
    for v in Variant::ALL {
        let out = apply_j(3, Sign::Minus, v, &ExpPoly::exp(C64::new(-2.0, 0.5)), &p)?;
        println!("J₃⁻ {v:?}: {} terms, value at t=1 {:.10}", out.len(), out.eval(1.0));
    }
    let crit = OdeParams::from_discriminant(3, 0.0, Q::from_integer(0), one, C64::new(0.0, 0.0))?;
    let c = apply_j_critical(Variant::Finite, 2, &ExpPoly::constant(one), &crit)?;
    println!("critical kernel on 1, n=3: value at t=2 {:.10}", c.eval(2.0));
    Ok(())
}
