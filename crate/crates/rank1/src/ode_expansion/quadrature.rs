//! Complex adaptive quadrature on finite and half-infinite ranges, used as an
//! independent oracle for the closed-form operators.

use crate::C64;
use quadrature::double_exponential;

fn real_pass(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let coarse = double_exponential::integrate(f, a, b, 1e-8);
    let abs_scale = double_exponential::integrate(|x| f(x).abs(), a, b, 1e-8).integral;
    let target = (rel * abs_scale.max(coarse.integral.abs())).max(1e-300);
    double_exponential::integrate(f, a, b, target).integral
}

/// `∫_a^b f` for complex `f`, relative accuracy `rel` against `∫|f|`.
pub fn integrate(f: impl Fn(f64) -> C64, a: f64, b: f64, rel: f64) -> C64 {
    if a == b {
        return C64::new(0.0, 0.0);
    }
    let re = real_pass(&|x| f(x).re, a, b, rel);
    let im = real_pass(&|x| f(x).im, a, b, rel);
    C64::new(re, im)
}

/// Panel width for half-infinite ranges.
const PANEL: f64 = 1.0;
/// Upper bound on the number of panels.
const MAX_PANELS: usize = 20_000;

/// `∫_a^∞ f` as a sum of unit panels, stopped once `∫|f|` over a panel is negligible and falling.
pub fn integrate_to_infinity(f: impl Fn(f64) -> C64, a: f64, rel: f64) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    let (mut abs_total, mut prev_abs) = (0.0f64, f64::INFINITY);
    for k in 0..MAX_PANELS {
        let lo = a + k as f64 * PANEL;
        let hi = lo + PANEL;
        total += integrate(&f, lo, hi, rel);
        let panel_abs = double_exponential::integrate(|x| f(x).norm(), lo, hi, 1e-6).integral;
        abs_total += panel_abs;
        if !panel_abs.is_finite() {
            break;
        }
        if panel_abs <= prev_abs && panel_abs <= 1e-3 * rel * abs_total {
            break;
        }
        prev_abs = panel_abs;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate(|x| C64::new(x * x, x), 0.0, 3.0, 1e-13);
        assert!((v - C64::new(9.0, 4.5)).norm() < 1e-12);
        let v = integrate_to_infinity(|x| C64::new(0.0, x * 2.0).exp() * (-x).exp(), 1.0, 1e-13);
        // ∫_1^∞ e^{(−1+2i)ξ} = e^{−1+2i}/(1−2i).
        let want = C64::new(-1.0, 2.0).exp() / C64::new(1.0, -2.0);
        assert!((v - want).norm() < 1e-12);
    }
}
