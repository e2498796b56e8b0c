//! Coefficient maps `(branch, m) → C` for terms `e^{(λ±−m)t}` and `t·e^{(λ₋−m)t}`,
//! and filtering of the plus branch.

use super::expansion::ExpansionReport;
use super::exppoly::{ExpPoly, ExpPolyTerm};
use super::operators::Sign;
use super::{OdeError, OdeParams};
use crate::C64;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Tolerance for recognizing an exponent as `λ± − m`.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Which family a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `e^{(λ₋−m)t}` (and `e^{(λ−m)t}` when `D = 0`).
    Minus,
    /// `e^{(λ₊−m)t}`.
    Plus,
    /// `t·e^{(λ₋−m)t}`.
    Polynomial,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
            Branch::Polynomial => "polynomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CoeffKey {
    pub branch: Branch,
    pub m: u32,
}

impl CoeffKey {
    pub fn new(branch: Branch, m: u32) -> Self {
        Self { branch, m }
    }
}

fn shift_index(lambda: C64, exponent: C64) -> Option<u32> {
    let m = lambda - exponent;
    let r = m.re.round();
    (r >= 0.0 && (m.re - r).abs() < EXPONENT_TOL && m.im.abs() < EXPONENT_TOL).then_some(r as u32)
}

/// Sorts every term of `p` into its `(branch, m)` slot; the minus branch wins when both fit.
pub fn collect_coefficients(p: &ExpPoly, params: &OdeParams) -> Result<BTreeMap<CoeffKey, C64>, OdeError> {
    let mut out = BTreeMap::new();
    let (lm, lp) = (params.lambda(Sign::Minus), params.lambda(Sign::Plus));
    for t in p.terms() {
        let key = match t.tpow {
            0 => shift_index(lm, t.exponent)
                .map(|m| CoeffKey::new(Branch::Minus, m))
                .or_else(|| shift_index(lp, t.exponent).map(|m| CoeffKey::new(Branch::Plus, m))),
            1 => shift_index(lm, t.exponent).map(|m| CoeffKey::new(Branch::Polynomial, m)),
            tpow => return Err(OdeError::UnsupportedPower { tpow }),
        }
        .ok_or(OdeError::InexpressibleExponent { exponent: t.exponent })?;
        *out.entry(key).or_insert(C64::new(0.0, 0.0)) += t.coeff;
    }
    Ok(out)
}

/// Inverse of [`collect_coefficients`].
pub fn rebuild_exp_poly(map: &BTreeMap<CoeffKey, C64>, params: &OdeParams) -> ExpPoly {
    ExpPoly::from_terms(map.iter().map(|(k, &coeff)| {
        let (lambda, tpow) = match k.branch {
            Branch::Minus => (params.lambda(Sign::Minus), 0),
            Branch::Plus => (params.lambda(Sign::Plus), 0),
            Branch::Polynomial => (params.lambda(Sign::Minus), 1),
        };
        ExpPolyTerm { coeff, tpow, exponent: lambda - k.m as f64 }
    }))
}

/// Plus-branch indices to drop: `m < max{0, Re√D − ν}`, or every index when real `√D ≥ (n−1)/2`.
pub fn plus_removal_set(
    keys: impl IntoIterator<Item = CoeffKey>,
    nu_gamma: f64,
    params: &OdeParams,
) -> Result<BTreeSet<CoeffKey>, OdeError> {
    let bound = (params.n as f64 - 1.0) / 2.0;
    if !(0.0..bound).contains(&nu_gamma) {
        return Err(OdeError::NuGammaOutOfRange { nu: nu_gamma, bound });
    }
    let sd = params.sqrt_d();
    let all = params.d >= 0.0 && sd.re >= bound;
    let threshold = (sd.re - nu_gamma).max(0.0);
    Ok(keys.into_iter().filter(|k| k.branch == Branch::Plus && (all || (k.m as f64) < threshold)).collect())
}

/// Removes the plus-branch coefficients excluded by the decay rate `ν(Γ)`.
pub fn filter_coefficients(
    report: &ExpansionReport,
    nu_gamma: f64,
    params: &OdeParams,
) -> Result<ExpansionReport, OdeError> {
    let removed = plus_removal_set(report.coeffs.keys().copied(), nu_gamma, params)?;
    let mut out = report.clone();
    out.coeffs.retain(|k, _| !removed.contains(k));
    out.removed.extend(removed);
    out.nu_gamma = Some(nu_gamma);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn params(n: usize, d: f64) -> OdeParams {
        OdeParams::from_discriminant(n, d, Q::from_integer(1), c(1.0), c(0.0)).unwrap()
    }

    #[test]
    fn collect_examples() {
        let p = params(5, -1.0);
        let lm = p.lambda(Sign::Minus);
        let poly = ExpPoly::exp(lm).scale(c(2.0)).add(&ExpPoly::exp(lm - 1.0).scale(c(3.0)));
        let map = collect_coefficients(&poly, &p).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map[&CoeffKey::new(Branch::Minus, 0)], c(2.0));
        assert_eq!(map[&CoeffKey::new(Branch::Minus, 1)], c(3.0));
        let map = collect_coefficients(&ExpPoly::monomial(c(1.0), 1, lm), &p).unwrap();
        assert_eq!(map[&CoeffKey::new(Branch::Polynomial, 0)], c(1.0));
    }

    #[test]
    fn collect_rejects_leaks() {
        let p = params(5, -1.0);
        assert!(matches!(collect_coefficients(&ExpPoly::exp(c(0.3)), &p), Err(OdeError::InexpressibleExponent { .. })));
        assert!(matches!(
            collect_coefficients(&ExpPoly::monomial(c(1.0), 2, p.lambda_minus), &p),
            Err(OdeError::UnsupportedPower { tpow: 2 })
        ));
    }

    #[test]
    fn filter_threshold_examples() {
        let keys: Vec<CoeffKey> =
            (0..6).flat_map(|m| [CoeffKey::new(Branch::Plus, m), CoeffKey::new(Branch::Minus, m)]).collect();
        let imag = plus_removal_set(keys.iter().copied(), 0.5, &params(6, -2.0)).unwrap();
        assert!(imag.is_empty());
        let two = plus_removal_set(keys.iter().copied(), 0.5, &params(6, 4.0)).unwrap();
        assert_eq!(two, [0, 1].map(|m| CoeffKey::new(Branch::Plus, m)).into_iter().collect());
        let three = plus_removal_set(keys.iter().copied(), 0.5, &params(6, 9.0)).unwrap();
        assert_eq!(three.len(), 6);
        assert!(three.iter().all(|k| k.branch == Branch::Plus));
        assert!(plus_removal_set(keys.iter().copied(), 2.5, &params(6, 4.0)).is_err());
        assert!(plus_removal_set(keys.iter().copied(), -0.1, &params(6, 4.0)).is_err());
    }

    proptest! {
        #[test]
        fn collect_round_trip(
            n in 3usize..8, d in -4.0f64..4.0,
            entries in prop::collection::vec((0u8..3, 0u32..8, -2.0f64..2.0, -2.0f64..2.0), 0..10),
        ) {
            let p = params(n, d);
            let map: BTreeMap<CoeffKey, C64> = entries
                .into_iter()
                .map(|(b, m, re, im)| {
                    let branch = [Branch::Minus, Branch::Plus, Branch::Polynomial][b as usize];
                    (CoeffKey::new(branch, m), C64::new(re, im))
                })
                .collect();
            let poly = rebuild_exp_poly(&map, &p);
            let back = rebuild_exp_poly(&collect_coefficients(&poly, &p).unwrap(), &p);
            for k in 0..10 {
                let t = 0.3 * k as f64;
                prop_assert!((poly.eval(t) - back.eval(t)).norm() <= 1e-12 * (1.0 + poly.eval(t).norm()));
            }
        }
    }
}
