//! Builds so(n,1), checks the Killing form against `2(n−1)·tr` and the Casimir element.

use rank1::lie_structure::{
    bracket, build_so_n1_basis, casimir_ad_operator, casimir_terms, killing_form, killing_trace_form,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [3usize, 4, 5] {
        let basis = build_so_n1_basis(n)?;
        let elems = basis.elements();
        let (x, y) = (elems[0], elems[elems.len() - 1]);
        let (kf, tf) = (killing_form(x, x, &basis)?, killing_trace_form(x, x));
        let z = bracket(x, y)?;
        let cas = casimir_ad_operator(&casimir_terms(&basis), &basis);
        println!(
            "so({n},1): dim {}, B(x,x) {kf:.6} vs trace form {tf:.6}, [x,y] residual {:.1e}, Casimir ad diagonal {:.6}",
            basis.dim(),
            z.algebra_residual(),
            cas[(0, 0)]
        );
    }
    Ok(())
}
