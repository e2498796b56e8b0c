//! KAN factorization of a random element and the Casimir identity in Iwasawa coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rank1::iwasawa::{iwasawa_decompose, random_group_element, reconstruct, verify_casimir_formula};
use rank1::lie_structure::build_so_n1_basis;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 3;
    let basis = build_so_n1_basis(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_group_element(&basis, 0.8, &mut rng);
    let c = iwasawa_decompose(&g, &basis)?;
    let err = (reconstruct(&c, &basis) - g.entries()).abs().max();
    println!("t = {:.6}, u = {:?}, |kan − g| = {err:.1e}", c.t, c.u);
    let report = verify_casimir_formula(20, n, 7)?;
    for v in &report.variants {
        println!("{:>12}: max rel err {:.2e}, matches {}", v.variant.name(), v.max_rel_err, v.matches);
    }
    Ok(())
}
