//! Exponential polynomials `Σ c·t^p·e^{μt}` with complex `c`, `μ`.

use crate::C64;
use serde::Serialize;
use std::cmp::Ordering;

/// Exponents closer than this are merged.
pub const MERGE_TOL: f64 = 1e-9;

/// One monomial `coeff · t^tpow · e^{exponent·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpPolyTerm {
    #[serde(serialize_with = "crate::ser_c64")]
    pub coeff: C64,
    pub tpow: u32,
    #[serde(serialize_with = "crate::ser_c64")]
    pub exponent: C64,
}

/// A canonical exponential polynomial: merged on `(tpow, exponent)`, sorted, no zero coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

fn key_cmp(a: &ExpPolyTerm, b: &ExpPolyTerm) -> Ordering {
    b.exponent.re.total_cmp(&a.exponent.re).then(a.exponent.im.total_cmp(&b.exponent.im)).then(a.tpow.cmp(&b.tpow))
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0, C64::new(0.0, 0.0))
    }

    pub fn monomial(coeff: C64, tpow: u32, exponent: C64) -> Self {
        Self::from_terms([ExpPolyTerm { coeff, tpow, exponent }])
    }

    /// `e^{μt}`.
    pub fn exp(exponent: C64) -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0, exponent)
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms(terms: impl IntoIterator<Item = ExpPolyTerm>) -> Self {
        let mut raw: Vec<ExpPolyTerm> = terms.into_iter().filter(|t| t.coeff != C64::new(0.0, 0.0)).collect();
        raw.sort_by(|a, b| a.exponent.re.total_cmp(&b.exponent.re));
        let mut out: Vec<ExpPolyTerm> = Vec::with_capacity(raw.len());
        for t in raw {
            let hit = out
                .iter_mut()
                .rev()
                .take_while(|o| o.exponent.re > t.exponent.re - MERGE_TOL)
                .find(|o| o.tpow == t.tpow && (o.exponent - t.exponent).norm() < MERGE_TOL);
            match hit {
                Some(o) => o.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff != C64::new(0.0, 0.0));
        out.sort_by(key_cmp);
        Self { terms: out }
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).copied())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| ExpPolyTerm { coeff: t.coeff * c, ..*t }))
    }

    /// Multiplies by `e^{shift·t}`.
    pub fn shift(&self, shift: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| ExpPolyTerm { exponent: t.exponent + shift, ..*t }))
    }

    /// Multiplies by `t`.
    pub fn mul_t(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|t| ExpPolyTerm { tpow: t.tpow + 1, ..*t }))
    }

    /// Exact derivative in `t`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(self.terms.iter().flat_map(|t| {
            let own = ExpPolyTerm { coeff: t.coeff * t.exponent, ..*t };
            let lower = (t.tpow > 0).then(|| ExpPolyTerm {
                coeff: t.coeff * t.tpow as f64,
                tpow: t.tpow - 1,
                exponent: t.exponent,
            });
            std::iter::once(own).chain(lower)
        }))
    }

    /// Evaluates with a Horner sweep inside each exponent group.
    pub fn eval(&self, t: f64) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        let mut i = 0;
        while i < self.terms.len() {
            let e = self.terms[i].exponent;
            let mut j = i;
            while j < self.terms.len() && self.terms[j].exponent == e {
                j += 1;
            }
            let top = self.terms[j - 1].tpow;
            let mut poly = C64::new(0.0, 0.0);
            let mut k = j;
            for p in (0..=top).rev() {
                poly *= t;
                if k > i && self.terms[k - 1].tpow == p {
                    poly += self.terms[k - 1].coeff;
                    k -= 1;
                }
            }
            total += poly * (e * t).exp();
            i = j;
        }
        total
    }

    /// Drops terms with `|coeff| < tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|t| t.coeff.norm() >= tol).copied().collect() }
    }

    pub fn max_tpow(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.tpow).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Largest real part among exponents.
    pub fn leading_real_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.exponent.re)
    }
}
