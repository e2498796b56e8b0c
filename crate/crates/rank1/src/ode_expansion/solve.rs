//! Closed-form and RK4 solutions of `y″ + (n−1)y′ + (ϖ−μ)y = 2e^{−t}G`.

use super::exppoly::ExpPoly;
use super::operators::{apply_difference, apply_j_critical, Sign, Variant};
use super::{OdeError, OdeParams};
use crate::C64;
use serde::Serialize;

/// Which closed form to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveBranch {
    /// Picks `Repeated` exactly when `D = 0`.
    Auto,
    /// Distinct roots `λ₊ ≠ λ₋`.
    Distinct,
    /// Repeated root `λ = (1−n)/2`.
    Repeated,
}

/// Closed-form solution for the given forcing `G`, choosing the branch from `D`.
pub fn solve_ode_explicit(params: &OdeParams, forcing: &ExpPoly) -> Result<ExpPoly, OdeError> {
    solve_ode_explicit_branch(params, forcing, SolveBranch::Auto)
}

/// Closed-form solution with an explicit branch choice.
pub fn solve_ode_explicit_branch(
    params: &OdeParams,
    forcing: &ExpPoly,
    branch: SolveBranch,
) -> Result<ExpPoly, OdeError> {
    let critical = params.is_critical();
    let repeated = match branch {
        SolveBranch::Auto => critical,
        SolveBranch::Distinct if critical => return Err(OdeError::BranchMismatch { d: params.d }),
        SolveBranch::Distinct => false,
        SolveBranch::Repeated if !critical => return Err(OdeError::NotCritical { d: params.d }),
        SolveBranch::Repeated => true,
    };
    let (y0, y1) = (params.i0, params.i0_prime);
    if repeated {
        let lam = params.lambda(Sign::Minus);
        let hom = ExpPoly::from_terms([
            super::exppoly::ExpPolyTerm { coeff: y0, tpow: 0, exponent: lam },
            super::exppoly::ExpPolyTerm { coeff: y1 - lam * y0, tpow: 1, exponent: lam },
        ]);
        let part = apply_j_critical(Variant::Finite, 2, forcing, params)?;
        return Ok(hom.sub(&part.scale(C64::new(2.0, 0.0))));
    }
    let sd = params.sqrt_d();
    let (lp, lm) = (params.lambda(Sign::Plus), params.lambda(Sign::Minus));
    let c1 = (lp * y0 - y1) / (sd * 2.0);
    let c2 = (y1 - lm * y0) / (sd * 2.0);
    let hom = ExpPoly::exp(lm).scale(c1).add(&ExpPoly::exp(lp).scale(c2));
    let part = apply_difference(2, Variant::Finite, forcing, params)?;
    Ok(hom.sub(&part.scale(C64::new(1.0, 0.0) / sd)))
}

/// `y″ + (n−1)y′ + (ϖ−μ)y − 2e^{−t}G` computed by exact differentiation.
pub fn ode_residual(params: &OdeParams, y: &ExpPoly, forcing: &ExpPoly) -> ExpPoly {
    let d1 = y.derivative();
    let d2 = d1.derivative();
    d2.add(&d1.scale(C64::new((params.n - 1) as f64, 0.0)))
        .add(&y.scale(C64::new(params.zeroth_order_coefficient(), 0.0)))
        .sub(&forcing.shift(C64::new(-1.0, 0.0)).scale(C64::new(2.0, 0.0)))
}

/// Largest coefficient among `y`, `y′`, `y″` and the forcing term, for scaling residuals.
pub fn residual_scale(params: &OdeParams, y: &ExpPoly, forcing: &ExpPoly) -> f64 {
    let d1 = y.derivative();
    let d2 = d1.derivative();
    let lead = params.zeroth_order_coefficient().abs().max((params.n - 1) as f64).max(1.0);
    [y.max_abs_coeff() * lead, d1.max_abs_coeff() * lead, d2.max_abs_coeff(), 2.0 * forcing.max_abs_coeff()]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Classical RK4 for the same equation from `(I0, I0′)`; returns `steps + 1` uniform samples on `[0, t_end]`.
pub fn solve_ode_numeric(
    params: &OdeParams,
    forcing: impl Fn(f64) -> C64,
    t_end: f64,
    steps: usize,
) -> Result<Vec<(f64, C64)>, OdeError> {
    if steps < 100 {
        return Err(OdeError::TooFewSteps { steps });
    }
    let a1 = (params.n - 1) as f64;
    let a0 = params.zeroth_order_coefficient();
    let rhs = |t: f64, y: C64, v: C64| -> (C64, C64) { (v, forcing(t) * (2.0 * (-t).exp()) - v * a1 - y * a0) };
    let h = t_end / steps as f64;
    let (mut y, mut v) = (params.i0, params.i0_prime);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, y));
    for k in 0..steps {
        let t = k as f64 * h;
        let (k1y, k1v) = rhs(t, y, v);
        let (k2y, k2v) = rhs(t + h / 2.0, y + k1y * (h / 2.0), v + k1v * (h / 2.0));
        let (k3y, k3v) = rhs(t + h / 2.0, y + k2y * (h / 2.0), v + k2v * (h / 2.0));
        let (k4y, k4v) = rhs(t + h, y + k3y * h, v + k3v * h);
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        out.push(((k + 1) as f64 * h, y));
    }
    Ok(out)
}

/// `max |explicit(t) − numeric(t)|` over the numeric samples.
pub fn max_abs_difference(explicit: &ExpPoly, numeric: &[(f64, C64)]) -> f64 {
    numeric.iter().map(|&(t, v)| (explicit.eval(t) - v).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::exppoly::ExpPolyTerm;
    use super::*;
    use crate::Q;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn params(n: usize, d: f64, y0: f64, y1: C64) -> OdeParams {
        OdeParams::from_discriminant(n, d, Q::new(3, 4), c(y0), y1).unwrap()
    }

    #[test]
    fn homogeneous_single_mode() {
        let p0 = params(5, -1.0, 1.0, c(0.0));
        let lm = p0.lambda(Sign::Minus);
        let p = params(5, -1.0, 1.0, lm);
        let y = solve_ode_explicit(&p, &ExpPoly::zero()).unwrap();
        assert!(y.sub(&ExpPoly::exp(lm)).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn oscillating_example() {
        // e^{−t}(cos 2t + ½ sin 2t).
        let p = params(3, -4.0, 1.0, c(0.0));
        let y = solve_ode_explicit(&p, &ExpPoly::zero()).unwrap();
        let rk = solve_ode_numeric(&p, |_| c(0.0), 10.0, 20_000).unwrap();
        for &(t, v) in rk.iter().step_by(997) {
            let want = (-t).exp() * ((2.0 * t).cos() + 0.5 * (2.0 * t).sin());
            assert!((y.eval(t) - want).norm() < 1e-13);
            assert!((v - want).norm() < 1e-8);
        }
        assert!(y
            .terms()
            .iter()
            .all(|t| (t.exponent.re + 1.0).abs() < 1e-15 && (t.exponent.im.abs() - 2.0).abs() < 1e-15));
    }

    #[test]
    fn repeated_root_example() {
        let p = params(3, 0.0, 0.0, c(1.0));
        let y = solve_ode_explicit(&p, &ExpPoly::zero()).unwrap();
        assert_eq!(y, ExpPoly::monomial(c(1.0), 1, c(-1.0)));
        assert!(matches!(
            solve_ode_explicit_branch(&p, &ExpPoly::zero(), SolveBranch::Distinct),
            Err(OdeError::BranchMismatch { .. })
        ));
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = params(4, -2.0, 0.0, c(0.0));
        let rk = solve_ode_numeric(&p, |_| c(0.0), 5.0, 100).unwrap();
        assert!(rk.iter().all(|&(_, v)| v == c(0.0)));
        assert!(matches!(solve_ode_numeric(&p, |_| c(0.0), 5.0, 99), Err(OdeError::TooFewSteps { .. })));
    }

    #[test]
    fn resonant_forcing_produces_t_power() {
        // n = 3, D = 1/4: λ₊ + n − 2 = 1/2 and forcing e^{−t/2} hits σ = 0.
        let p = params(3, 0.25, 1.0, c(0.0));
        let forcing = ExpPoly::exp(c(-0.5));
        let y = solve_ode_explicit(&p, &forcing).unwrap();
        assert_eq!(y.max_tpow(), Some(1));
        let r = ode_residual(&p, &y, &forcing);
        assert!(r.max_abs_coeff() <= 1e-12 * residual_scale(&p, &y, &forcing));
    }

    #[test]
    fn step_halving_converges() {
        let p = params(5, -1.0, 1.0, c(-0.5));
        let forcing = |t: f64| C64::new(0.0, 1.0) * (C64::new(-0.5, 1.0) * t).exp();
        let a = solve_ode_numeric(&p, forcing, 10.0, 10_000).unwrap();
        let b = solve_ode_numeric(&p, forcing, 10.0, 20_000).unwrap();
        let diff = a.iter().zip(b.iter().step_by(2)).map(|(x, y)| (x.1 - y.1).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff}");
    }

    fn arb_forcing() -> impl Strategy<Value = ExpPoly> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0u32..2, -2.0f64..0.0, -2.0f64..2.0), 1..4).prop_map(|v| {
            ExpPoly::from_terms(v.into_iter().map(|(a, b, p, er, ei)| ExpPolyTerm {
                coeff: C64::new(a, b),
                tpow: p,
                exponent: C64::new(er, ei),
            }))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn explicit_solution_properties(
            n in 3usize..8, d in -4.0f64..6.0, zero in any::<bool>(),
            y0 in -1.0f64..1.0, y1 in -1.0f64..1.0, g in arb_forcing(),
        ) {
            let d = if zero { 0.0 } else { d };
            let p = params(n, d, y0, c(y1));
            let y = solve_ode_explicit(&p, &g).unwrap();
            let r = ode_residual(&p, &y, &g);
            prop_assert!(r.max_abs_coeff() <= 1e-12 * residual_scale(&p, &y, &g));
            let tol = 1e-12 * (1.0 + y.max_abs_coeff());
            prop_assert!((y.eval(0.0) - c(y0)).norm() <= tol);
            prop_assert!((y.derivative().eval(0.0) - c(y1)).norm() <= 1e-12 * (1.0 + y.derivative().max_abs_coeff()));
        }
    }
}
