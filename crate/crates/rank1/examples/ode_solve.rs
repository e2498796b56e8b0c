//! Closed-form solution of the rank-one ODE against RK4, one draw per discriminant regime.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rank1::cli::suite::{draw_regime, REGIMES};
use rank1::cli::{ode_check, random_forcing};
use rank1::ode_expansion::OdeParams;
use rank1::{C64, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for regime in REGIMES {
        let (n, d) = draw_regime(regime, &mut rng);
        let p = OdeParams::from_discriminant(n, d, Q::new(1, 2), C64::new(1.0, 0.0), C64::new(-0.5, 0.2))?;
        let forcing = random_forcing(2, &mut rng);
        let r = ode_check(&p, &forcing, 20_000, 10.0)?;
        println!("{regime:?}: n={n} D={d:.4} max |explicit − RK4| {:.2e}", r.max_abs_diff);
    }
    Ok(())
}
