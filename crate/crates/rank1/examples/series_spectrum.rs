//! Casimir eigenvalues of principal and complementary series and the attached ODE discriminant.

use rank1::repn_catalog::{casimir_g_series, series_datum, HighestWeight, Scalar, SeriesParam};
use rank1::Q;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5;
    let eta = HighestWeight::from_ints(&[1, 0], n - 1)?;
    let cases = [
        SeriesParam::Principal { s: Scalar::Exact(Q::new(3, 2)), eta: eta.clone() },
        SeriesParam::Complementary { nu: Scalar::Exact(Q::new(1, 2)), eta },
    ];
    for p in &cases {
        p.validate(n)?;
        let ev = casimir_g_series(p, n)?;
        let d = series_datum(p, Q::from_integer(2), n)?;
        println!(
            "{}: eigenvalue {ev:?}, D = {:?}, √D class {:?}, λ± = {:.4} / {:.4}",
            p.kind(),
            d.d,
            d.sqrt_d_class,
            d.lambda_plus,
            d.lambda_minus
        );
    }
    Ok(())
}
