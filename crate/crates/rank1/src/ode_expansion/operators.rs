//! Closed-form integral operators on exponential polynomials.

use super::exppoly::{ExpPoly, ExpPolyTerm};
use super::{OdeError, OdeParams};
use crate::C64;
use serde::Serialize;

/// `|σ|` below this is treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Largest supported power of `ξ`.
pub const MAX_POWER: u32 = 64;

/// Integration range relative to the evaluation point `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `∫_0^t`.
    Finite,
    /// `∫_t^∞`.
    Tail,
    /// `∫_0^∞`.
    Limit,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Finite, Variant::Tail, Variant::Limit];
}

/// Which characteristic root sits inside the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn opposite(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Closed form of `∫ ξ^p e^{σξ} dξ` split into a `t`-dependent part and a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialIntegral {
    pub varying: ExpPoly,
    pub constant: C64,
}

impl MonomialIntegral {
    pub fn to_exp_poly(&self) -> ExpPoly {
        self.varying.add(&ExpPoly::constant(self.constant))
    }
}

/// Terms of the antiderivative `F(ξ) = e^{σξ} Σ_k (−1)^k p!/(p−k)! ξ^{p−k} / σ^{k+1}`.
fn antiderivative(p: u32, sigma: C64) -> Vec<ExpPolyTerm> {
    let mut coeff = C64::new(1.0, 0.0) / sigma;
    let mut out = Vec::with_capacity(p as usize + 1);
    for k in 0..=p {
        out.push(ExpPolyTerm { coeff, tpow: p - k, exponent: sigma });
        coeff = -coeff * (p - k) as f64 / sigma;
    }
    out
}

/// `F(0)`.
fn antiderivative_at_zero(p: u32, sigma: C64) -> C64 {
    let mut v = C64::new(1.0, 0.0) / sigma;
    for k in 1..=p {
        v = -v * k as f64 / sigma;
    }
    v
}

/// `∫ ξ^p e^{σξ} dξ` over the variant's range, as a function of `t`.
pub fn integrate_monomial(p: u32, sigma: C64, variant: Variant) -> Result<MonomialIntegral, OdeError> {
    if p > MAX_POWER {
        return Err(OdeError::PowerTooLarge { p });
    }
    if sigma.norm() < RESONANCE_TOL {
        return match variant {
            Variant::Finite => Ok(MonomialIntegral {
                varying: ExpPoly::monomial(C64::new(1.0 / (p + 1) as f64, 0.0), p + 1, C64::new(0.0, 0.0)),
                constant: C64::new(0.0, 0.0),
            }),
            _ => Err(OdeError::Divergence { sigma, term: None }),
        };
    }
    if variant != Variant::Finite && sigma.re >= 0.0 {
        return Err(OdeError::Divergence { sigma, term: None });
    }
    let f = ExpPoly::from_terms(antiderivative(p, sigma));
    let f0 = antiderivative_at_zero(p, sigma);
    Ok(match variant {
        Variant::Finite => MonomialIntegral { varying: f, constant: -f0 },
        Variant::Tail => MonomialIntegral { varying: f.scale(C64::new(-1.0, 0.0)), constant: C64::new(0.0, 0.0) },
        Variant::Limit => MonomialIntegral { varying: ExpPoly::zero(), constant: -f0 },
    })
}

type Observer<'a> = Option<&'a mut dyn FnMut(C64)>;

fn tag(err: OdeError, term: usize) -> OdeError {
    match err {
        OdeError::Divergence { sigma, .. } => OdeError::Divergence { sigma, term: Some(term) },
        e => e,
    }
}

/// `∫ K(ξ,t) e^{aξ} P(ξ) dξ` with kernel `1` or `(ξ−t)`, multiplied by `e^{outer·t}`.
fn apply_kernel(
    shift: C64,
    outer: C64,
    critical: bool,
    variant: Variant,
    poly: &ExpPoly,
    mut observer: Observer<'_>,
) -> Result<ExpPoly, OdeError> {
    let mut acc: Vec<ExpPolyTerm> = Vec::new();
    for (idx, term) in poly.terms().iter().enumerate() {
        let sigma = shift + term.exponent;
        if let Some(obs) = observer.as_mut() {
            obs(sigma);
        }
        let mut push = |p: u32, weight: C64, mul_t: bool| -> Result<(), OdeError> {
            let r = integrate_monomial(p, sigma, variant).map_err(|e| tag(e, idx))?;
            let extra = u32::from(mul_t);
            for t in r.to_exp_poly().terms() {
                acc.push(ExpPolyTerm { coeff: t.coeff * weight, tpow: t.tpow + extra, exponent: t.exponent + outer });
            }
            Ok(())
        };
        if critical {
            push(term.tpow + 1, term.coeff, false)?;
            push(term.tpow, -term.coeff, true)?;
        } else {
            push(term.tpow, term.coeff, false)?;
        }
    }
    Ok(ExpPoly::from_terms(acc))
}

fn check_index(i: u32) -> Result<(), OdeError> {
    if i == 2 || i == 3 {
        Ok(())
    } else {
        Err(OdeError::BadIndex { i })
    }
}

pub(crate) fn apply_j_observed(
    i: u32,
    sign: Sign,
    variant: Variant,
    poly: &ExpPoly,
    params: &OdeParams,
    observer: Observer<'_>,
) -> Result<ExpPoly, OdeError> {
    check_index(i)?;
    let inner = params.lambda(sign);
    let outer = params.lambda(sign.opposite());
    let shift = C64::new((params.n - i as usize) as f64, 0.0) + inner;
    apply_kernel(shift, outer, false, variant, poly, observer)
}

/// `e^{λ∓t} ∫ e^{(n−i+λ±)ξ} P(ξ) dξ` over the variant's range.
pub fn apply_j(i: u32, sign: Sign, variant: Variant, poly: &ExpPoly, params: &OdeParams) -> Result<ExpPoly, OdeError> {
    apply_j_observed(i, sign, variant, poly, params, None)
}

pub(crate) fn apply_j_critical_observed(
    variant: Variant,
    i: u32,
    poly: &ExpPoly,
    params: &OdeParams,
    observer: Observer<'_>,
) -> Result<ExpPoly, OdeError> {
    check_index(i)?;
    if !params.is_critical() {
        return Err(OdeError::NotCritical { d: params.d });
    }
    let lambda = params.lambda(Sign::Minus);
    let shift = C64::new((1 + params.n) as f64 / 2.0 - i as f64, 0.0);
    apply_kernel(shift, lambda, true, variant, poly, observer)
}

/// `e^{λt} ∫ (ξ−t) e^{((1+n)/2−i)ξ} P(ξ) dξ` over the variant's range; requires `D = 0`.
pub fn apply_j_critical(variant: Variant, i: u32, poly: &ExpPoly, params: &OdeParams) -> Result<ExpPoly, OdeError> {
    apply_j_critical_observed(variant, i, poly, params, None)
}

/// `(J_i⁺ − J_i⁻)(P)` with both operators in the given variant.
pub fn apply_difference(i: u32, variant: Variant, poly: &ExpPoly, params: &OdeParams) -> Result<ExpPoly, OdeError> {
    let plus = apply_j(i, Sign::Plus, variant, poly, params)?;
    let minus = apply_j(i, Sign::Minus, variant, poly, params)?;
    Ok(plus.sub(&minus))
}

#[cfg(test)]
mod tests {
    use super::super::quadrature::{integrate, integrate_to_infinity};
    use super::*;
    use crate::Q;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn params(n: usize, d: f64) -> OdeParams {
        OdeParams::from_discriminant(n, d, Q::from_integer(0), c(1.0), c(0.0)).unwrap()
    }

    #[test]
    fn monomial_examples() {
        let r = integrate_monomial(1, c(0.0), Variant::Finite).unwrap().to_exp_poly();
        assert_eq!(r, ExpPoly::monomial(c(0.5), 2, c(0.0)));
        let r = integrate_monomial(0, c(-1.0), Variant::Tail).unwrap().to_exp_poly();
        assert_eq!(r, ExpPoly::exp(c(-1.0)));
        let r = integrate_monomial(0, c(2.0), Variant::Finite).unwrap().to_exp_poly();
        let quad = integrate(|x| (2.0 * x).exp().into(), 0.0, 1.0, 1e-14);
        assert!((r.eval(1.0) - quad).norm() < 1e-10);
        assert!(((r.eval(1.0) - c((2f64.exp() - 1.0) / 2.0)).norm()) < 1e-14);
    }

    #[test]
    fn monomial_errors() {
        assert!(matches!(integrate_monomial(0, c(0.5), Variant::Tail), Err(OdeError::Divergence { .. })));
        assert!(matches!(integrate_monomial(2, c(0.0), Variant::Limit), Err(OdeError::Divergence { .. })));
        assert!(matches!(integrate_monomial(65, c(-1.0), Variant::Finite), Err(OdeError::PowerTooLarge { .. })));
    }

    #[test]
    fn zero_input_maps_to_zero() {
        let p = params(5, -1.0);
        for v in Variant::ALL {
            for s in Sign::BOTH {
                assert!(apply_j(2, s, v, &ExpPoly::zero(), &p).unwrap().is_empty());
            }
        }
        let z = params(3, 0.0);
        for v in Variant::ALL {
            assert!(apply_j_critical(v, 2, &ExpPoly::zero(), &z).unwrap().is_empty());
        }
    }

    #[test]
    fn difference_action_four_term_formula() {
        for n in [3usize, 4, 6] {
            for d in [-1.0, -0.3, -5.0] {
                let p = params(n, d);
                let two_sqrt_d = p.sqrt_d() * 2.0;
                for i in [2u32, 3] {
                    for k in 0..4u32 {
                        let kk = (k + i - 1) as f64;
                        for s in Sign::BOTH {
                            let pm = s.factor();
                            let lam = p.lambda(s);
                            let lam_other = p.lambda(s.opposite());
                            let input = ExpPoly::exp(lam - k as f64);
                            let got = apply_difference(i, Variant::Finite, &input, &p).unwrap();
                            let shifted = lam - kk;
                            let want = ExpPoly::from_terms([
                                ExpPolyTerm { coeff: 1.0 / (two_sqrt_d - pm * kk), tpow: 0, exponent: shifted },
                                ExpPolyTerm { coeff: c(pm / kk), tpow: 0, exponent: shifted },
                                ExpPolyTerm { coeff: 1.0 / (-two_sqrt_d + pm * kk), tpow: 0, exponent: lam_other },
                                ExpPolyTerm { coeff: c(-pm / kk), tpow: 0, exponent: lam },
                            ]);
                            let diff = got.sub(&want);
                            assert!(diff.max_abs_coeff() < 1e-13, "n={n} d={d} i={i} k={k} {diff:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn difference_of_constant_matches_quadrature() {
        let p = params(3, -1.0);
        let v = apply_difference(2, Variant::Finite, &ExpPoly::constant(c(1.0)), &p).unwrap().eval(1.0);
        let (lp, lm) = (p.lambda(Sign::Plus), p.lambda(Sign::Minus));
        let plus = (lm * 1.0).exp() * integrate(|x| ((1.0 + lp) * x).exp(), 0.0, 1.0, 1e-14);
        let minus = (lp * 1.0).exp() * integrate(|x| ((1.0 + lm) * x).exp(), 0.0, 1.0, 1e-14);
        assert!((v - (plus - minus)).norm() < 1e-10);
    }

    #[test]
    fn critical_kernel_on_constant() {
        // (ξ−t) kernel: e^{−t}∫₀ᵗ(ξ−t)dξ = −t²e^{−t}/2.
        let p = params(3, 0.0);
        let once = apply_j_critical(Variant::Finite, 2, &ExpPoly::constant(c(1.0)), &p).unwrap();
        assert!(once.sub(&ExpPoly::monomial(c(-0.5), 2, c(-1.0))).max_abs_coeff() < 1e-15);
        let twice = apply_j_critical(Variant::Finite, 2, &once, &p).unwrap();
        assert_eq!(twice.max_tpow(), Some(2));
        for t in [0.5, 1.0, 2.0] {
            let quad = integrate(|x| (c(-1.0) * t).exp() * (x - t) * once.eval(x), 0.0, t, 1e-14);
            assert!((twice.eval(t) - quad).norm() < 1e-10 * (1.0 + quad.norm()));
        }
    }

    #[test]
    fn critical_requires_zero_discriminant() {
        let p = params(3, -1.0);
        assert!(matches!(
            apply_j_critical(Variant::Finite, 2, &ExpPoly::constant(c(1.0)), &p),
            Err(OdeError::NotCritical { .. })
        ));
    }

    #[test]
    fn tail_divergence_names_term() {
        let p = params(5, -1.0);
        let poly = ExpPoly::exp(c(-5.0)).add(&ExpPoly::exp(c(3.0)));
        match apply_j(2, Sign::Plus, Variant::Tail, &poly, &p) {
            Err(OdeError::Divergence { term: Some(0), sigma }) => assert!(sigma.re >= 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn limit_is_pure_outer_exponential() {
        let p = params(5, -2.0);
        let poly = ExpPoly::monomial(C64::new(1.0, 2.0), 2, C64::new(-1.0, 0.3));
        let r = apply_j(3, Sign::Minus, Variant::Limit, &poly, &p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.terms()[0].exponent - p.lambda(Sign::Plus)).norm() < 1e-15);
        let fin = apply_j(3, Sign::Minus, Variant::Finite, &poly, &p).unwrap();
        let tail = apply_j(3, Sign::Minus, Variant::Tail, &poly, &p).unwrap();
        assert!(r.sub(&fin).sub(&tail).max_abs_coeff() < 1e-13);
    }

    fn quad_oracle(i: u32, sign: Sign, variant: Variant, term: ExpPolyTerm, p: &OdeParams, t: f64) -> C64 {
        let a = C64::new((p.n - i as usize) as f64, 0.0) + p.lambda(sign);
        let f = move |x: f64| term.coeff * x.powi(term.tpow as i32) * ((a + term.exponent) * x).exp();
        let outer = (p.lambda(sign.opposite()) * t).exp();
        let val = match variant {
            Variant::Finite => integrate(f, 0.0, t, 1e-14),
            Variant::Tail => integrate_to_infinity(f, t, 1e-14),
            Variant::Limit => integrate(f, 0.0, t, 1e-14) + integrate_to_infinity(f, t, 1e-14),
        };
        outer * val
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn operators_match_quadrature(
            n in 3usize..8, d in -4.0f64..-0.1, i in 2u32..4, plus in any::<bool>(),
            m in 0u32..4, q in 0u32..3, re in -1.0f64..1.0, im in -1.0f64..1.0, vi in 0usize..3,
        ) {
            let p = params(n, d);
            let sign = if plus { Sign::Plus } else { Sign::Minus };
            let variant = Variant::ALL[vi];
            let term = ExpPolyTerm { coeff: C64::new(re, im), tpow: q, exponent: p.lambda(Sign::Minus) - m as f64 };
            let out = apply_j(i, sign, variant, &ExpPoly::from_terms([term]), &p).unwrap();
            for t in [0.5, 1.0, 2.0, 4.0] {
                let want = quad_oracle(i, sign, variant, term, &p, t);
                let got = out.eval(t);
                prop_assert!((got - want).norm() <= 1e-9 * got.norm().max(want.norm()).max(1e-300),
                    "t={} got={} want={}", t, got, want);
            }
        }
    }
}
