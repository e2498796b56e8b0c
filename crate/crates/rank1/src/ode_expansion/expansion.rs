//! Iterated expansion of the solution tower over operator words in `{2,3}`.
//!
//! Each word `A` carries `I_A = ψ₀(A) − g·Δ₂(G_A)` with `G_A = −(√2·I_{A2} + e^{−t}·I_{A3})`,
//! `g = 1/√D` (or `2` with the `(ξ−t)` kernel when `D = 0`) and `ψ₀` built from injected
//! `Θ±` scalars. Chains are written innermost first; words outermost first.

use super::coefficients::{collect_coefficients, CoeffKey};
use super::exppoly::{ExpPoly, ExpPolyTerm};
use super::operators::{apply_j_critical_observed, apply_j_observed, Sign, Variant};
use super::{OdeError, OdeParams};
use crate::repn_catalog::SqrtDClass;
use crate::C64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

/// Coefficients below this are dropped from reports.
pub const PRUNE_TOL: f64 = 1e-14;
/// Depth beyond `ℓ` at which the tower is closed with `I = ψ₀`.
pub const CAP_EXTRA: usize = 3;
/// Remainder sampling grid.
pub const SAMPLE_END: f64 = 12.0;
pub const SAMPLE_STEP: f64 = 0.05;
/// Start of the decay fit window.
pub const FIT_START: f64 = 2.0;

/// Supplies `(Θ⁻, Θ⁺)` for each word (outermost letter first).
pub trait ThetaProvider: Sync {
    fn theta(&self, word: &[u8]) -> (C64, C64);
}

impl<F: Fn(&[u8]) -> (C64, C64) + Sync> ThetaProvider for F {
    fn theta(&self, word: &[u8]) -> (C64, C64) {
        self(word)
    }
}

/// `(Θ⁻, Θ⁺) · ratio^{|word|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricTheta {
    #[serde(serialize_with = "crate::ser_c64")]
    pub minus: C64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub plus: C64,
    pub ratio: f64,
}

impl GeometricTheta {
    /// `Θ± = 2^{−|word|}`.
    pub fn halving() -> Self {
        Self { minus: C64::new(1.0, 0.0), plus: C64::new(1.0, 0.0), ratio: 0.5 }
    }
}

impl ThetaProvider for GeometricTheta {
    fn theta(&self, word: &[u8]) -> (C64, C64) {
        let s = self.ratio.powi(word.len() as i32);
        (self.minus * s, self.plus * s)
    }
}

/// Number of finite applications per sign before switching to limit minus tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchTable {
    pub regime: SqrtDClass,
    pub d_plus: usize,
    pub d_minus: usize,
    /// `max(d₊, d₋)`; the expansion needs `ℓ` above it.
    pub ell_plus: usize,
    /// `⌊Re((n−3)/2 + √D)⌋ + 3`, reported alongside.
    pub ell_plus_uniform: i64,
    /// Whether `Θ⁺` is forced to zero.
    pub plus_vanishes: bool,
}

impl SwitchTable {
    pub fn for_params(params: &OdeParams) -> Self {
        let n = params.n as f64;
        let regime = params.regime();
        let floor1 = |x: f64| (x.floor() as i64 + 1).max(0) as usize;
        let base = n - 2.0;
        let (d_plus, d_minus) = match regime {
            SqrtDClass::Imaginary | SqrtDClass::Zero => {
                let d = floor1((n - 3.0) / 2.0);
                (d, d)
            }
            SqrtDClass::RealSmall => (floor1(base + params.lambda_plus.re) + 2, floor1(base + params.lambda_minus.re)),
            SqrtDClass::RealMid | SqrtDClass::RealLarge => (floor1(base + params.lambda_plus.re), 0),
        };
        let ell_plus_uniform = ((n - 3.0) / 2.0 + params.sqrt_d().re).floor() as i64 + 3;
        Self {
            regime,
            d_plus,
            d_minus,
            ell_plus: d_plus.max(d_minus),
            ell_plus_uniform,
            plus_vanishes: regime == SqrtDClass::RealLarge,
        }
    }

    fn depth(&self, sign: Sign) -> usize {
        match sign {
            Sign::Plus => self.d_plus,
            Sign::Minus => self.d_minus,
        }
    }
}

/// One of the per-sign pieces of a difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Finite,
    NegTail,
    Limit,
}

/// `Σ_σ sgn(σ)·piece_σ` with index `idx`; with `D = 0` only the plus slot is used.
#[derive(Debug, Clone, Copy)]
struct Op {
    idx: u32,
    plus: Option<Piece>,
    minus: Option<Piece>,
}

struct Engine<'a> {
    params: &'a OdeParams,
    table: SwitchTable,
    g: C64,
    divisor_bits: AtomicU64,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn letter_coeff(i: u8) -> f64 {
    if i == 2 {
        SQRT2
    } else {
        1.0
    }
}

impl<'a> Engine<'a> {
    fn new(params: &'a OdeParams) -> Self {
        let g = if params.is_critical() { C64::new(2.0, 0.0) } else { C64::new(1.0, 0.0) / params.sqrt_d() };
        Self { params, table: SwitchTable::for_params(params), g, divisor_bits: AtomicU64::new(0) }
    }

    fn observe(&self, sigma: C64) {
        if sigma.im.abs() > 1e-12 {
            let v = 1.0 / sigma.norm();
            self.divisor_bits.fetch_max(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn piece(&self, piece: Piece, sign: Sign, idx: u32, p: &ExpPoly) -> Result<ExpPoly, OdeError> {
        let variant = match piece {
            Piece::Finite => Variant::Finite,
            Piece::NegTail => Variant::Tail,
            Piece::Limit => Variant::Limit,
        };
        let mut obs = |s: C64| self.observe(s);
        let out = if self.params.is_critical() {
            apply_j_critical_observed(variant, idx, p, self.params, Some(&mut obs))?
        } else {
            apply_j_observed(idx, sign, variant, p, self.params, Some(&mut obs))?
        };
        Ok(if piece == Piece::NegTail { out.scale(C64::new(-1.0, 0.0)) } else { out })
    }

    fn apply(&self, op: Op, p: &ExpPoly) -> Result<ExpPoly, OdeError> {
        let mut out = ExpPoly::zero();
        if let Some(pc) = op.plus {
            out = out.add(&self.piece(pc, Sign::Plus, op.idx, p)?);
        }
        if !self.params.is_critical() {
            if let Some(pc) = op.minus {
                out = out.sub(&self.piece(pc, Sign::Minus, op.idx, p)?);
            }
        }
        Ok(out)
    }

    fn chain(&self, ops: &[Op], p: &ExpPoly) -> Result<ExpPoly, OdeError> {
        ops.iter().try_fold(p.clone(), |acc, &op| self.apply(op, &acc))
    }

    /// Operator at label `label ≥ 1`: finite while `label ≤ d_σ`, then minus the tail.
    fn residual_op(&self, idx: u8, label: usize) -> Op {
        let form = |s: Sign| Some(if label <= self.table.depth(s) { Piece::Finite } else { Piece::NegTail });
        Op { idx: idx as u32, plus: form(Sign::Plus), minus: form(Sign::Minus) }
    }

    /// Difference between labels `label − 1` and `label`, if any.
    fn emission_op(&self, idx: u8, label: usize) -> Option<Op> {
        let hit = |s: Sign| {
            let d = self.table.depth(s);
            (d >= 1 && label == d + 1).then_some(Piece::Limit)
        };
        let op = Op { idx: idx as u32, plus: hit(Sign::Plus), minus: hit(Sign::Minus) };
        let active = op.plus.is_some() || (!self.params.is_critical() && op.minus.is_some());
        active.then_some(op)
    }

    fn psi0(&self, word: &[u8], theta: &dyn ThetaProvider) -> ExpPoly {
        let (tm, mut tp) = theta.theta(word);
        if self.table.plus_vanishes {
            tp = C64::new(0.0, 0.0);
        }
        if self.params.is_critical() {
            let lam = self.params.lambda(Sign::Minus);
            ExpPoly::from_terms([
                ExpPolyTerm { coeff: tm, tpow: 0, exponent: lam },
                ExpPolyTerm { coeff: tp, tpow: 1, exponent: lam },
            ])
        } else {
            ExpPoly::exp(self.params.lambda(Sign::Minus))
                .scale(tm)
                .add(&ExpPoly::exp(self.params.lambda(Sign::Plus)).scale(tp))
        }
    }

    fn word_coeff(&self, word: &[u8]) -> C64 {
        word.iter().fold(C64::new(1.0, 0.0), |acc, &i| acc * self.g * letter_coeff(i))
    }

    /// Residual-form chain for `word`: position `p` (innermost `1`) has index `word[k−p]`, label `p + offset`.
    fn word_chain(&self, word: &[u8], offset: usize) -> Vec<Op> {
        let k = word.len();
        (1..=k).map(|p| self.residual_op(word[k - p], p + offset)).collect()
    }
}

fn words_of_length(k: usize) -> Vec<Vec<u8>> {
    (0..1usize << k).map(|bits| (0..k).map(|j| if bits >> (k - 1 - j) & 1 == 0 { 2 } else { 3 }).collect()).collect()
}

/// Exponential polynomials behind an [`ExpansionReport`].
#[derive(Debug, Clone)]
pub struct ExpansionParts {
    /// `I` at the root word.
    pub explicit: ExpPoly,
    /// Forcing `G` at the root word.
    pub root_forcing: ExpPoly,
    /// Main terms plus switch-depth emissions.
    pub truncated: ExpPoly,
    /// Remainder computed directly from the depth-`ℓ` words.
    pub remainder: ExpPoly,
    pub report: ExpansionReport,
}

/// Coefficient map, remainder samples and fitted decay of an expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub coeffs: BTreeMap<CoeffKey, C64>,
    pub ell: usize,
    pub ell_plus: usize,
    pub switch: SwitchTable,
    pub remainder_samples: Vec<(f64, f64)>,
    pub fitted_decay: f64,
    /// Largest coefficient of `explicit − truncated − remainder`, relative to the explicit solution.
    pub identity_residual: f64,
    /// Largest `|1/σ|` over divisors with nonzero imaginary part.
    pub max_complex_divisor: f64,
    pub removed: BTreeSet<CoeffKey>,
    pub nu_gamma: Option<f64>,
}

#[derive(Serialize)]
struct CoeffRow {
    branch: &'static str,
    m: u32,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SampleRow {
    t: f64,
    abs: f64,
}

impl ExpansionReport {
    fn coeff_rows(&self) -> Vec<CoeffRow> {
        self.coeffs.iter().map(|(k, v)| CoeffRow { branch: k.branch.name(), m: k.m, re: v.re, im: v.im }).collect()
    }

    /// Remainder samples as CSV with header `t,abs`.
    pub fn remainder_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for &(t, abs) in &self.remainder_samples {
            w.serialize(SampleRow { t, abs })?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

impl Serialize for ExpansionReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExpansionReport", 10)?;
        st.serialize_field("coeffs", &self.coeff_rows())?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("fitted_decay", &self.fitted_decay)?;
        let rows: Vec<SampleRow> = self.remainder_samples.iter().map(|&(t, abs)| SampleRow { t, abs }).collect();
        st.serialize_field("remainder", &rows)?;
        st.serialize_field("ell_plus", &self.ell_plus)?;
        st.serialize_field("switch", &self.switch)?;
        st.serialize_field("identity_residual", &self.identity_residual)?;
        st.serialize_field("max_complex_divisor", &self.max_complex_divisor)?;
        let removed: Vec<CoeffRow> =
            self.removed.iter().map(|k| CoeffRow { branch: k.branch.name(), m: k.m, re: 0.0, im: 0.0 }).collect();
        st.serialize_field("removed", &removed)?;
        st.serialize_field("nu_gamma", &self.nu_gamma)?;
        st.end()
    }
}

/// Runs the iterated expansion to depth `ell` and returns the report.
pub fn expand_iterated(params: &OdeParams, theta: &dyn ThetaProvider, ell: usize) -> Result<ExpansionReport, OdeError> {
    expand_iterated_parts(params, theta, ell).map(|p| p.report)
}

fn internal(e: OdeError) -> OdeError {
    match e {
        OdeError::Divergence { sigma, term } => {
            OdeError::Internal(format!("tail diverged before the switch depth (σ = {sigma}, term {term:?})"))
        }
        e => e,
    }
}

/// Runs the iterated expansion and also returns the underlying exponential polynomials.
pub fn expand_iterated_parts(
    params: &OdeParams,
    theta: &dyn ThetaProvider,
    ell: usize,
) -> Result<ExpansionParts, OdeError> {
    let eng = Engine::new(params);
    if ell <= eng.table.ell_plus {
        return Err(OdeError::EllTooSmall { ell, required: eng.table.ell_plus + 1 });
    }
    let cap = ell + CAP_EXTRA;
    let base = |idx: u8| eng.residual_op(idx, 1);

    // Explicit tower, deepest level first.
    let mut tower: HashMap<Vec<u8>, (ExpPoly, ExpPoly)> = HashMap::new();
    for depth in (0..=cap).rev() {
        let level: Vec<(Vec<u8>, (ExpPoly, ExpPoly))> = words_of_length(depth)
            .into_par_iter()
            .map(|w| {
                let psi = eng.psi0(&w, theta);
                if depth == cap {
                    return Ok((w, (psi, ExpPoly::zero())));
                }
                let forcing = forcing_of(&tower, &w);
                let r0 = eng.apply(base(2), &forcing).map_err(internal)?.scale(-eng.g);
                Ok((w, (psi.add(&r0), r0)))
            })
            .collect::<Result<_, OdeError>>()?;
        tower.extend(level);
    }
    let explicit = tower[&Vec::new()].0.clone();
    let root_forcing = forcing_of(&tower, &[]);

    // Main terms.
    let main_parts: Vec<ExpPoly> = (0..=ell)
        .flat_map(words_of_length)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|w| {
            let psi = eng.psi0(&w, theta);
            Ok(eng.chain(&eng.word_chain(&w, 0), &psi).map_err(internal)?.scale(eng.word_coeff(&w)))
        })
        .collect::<Result<_, OdeError>>()?;

    // Emissions where a position crosses a switch depth.
    let emission_parts: Vec<ExpPoly> = (0..ell)
        .flat_map(words_of_length)
        .flat_map(|a| [2u8, 3].map(|i| [a.clone(), vec![i]].concat()))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|child| {
            let kk = child.len();
            let input = &tower[&child].0;
            let mut acc = ExpPoly::zero();
            for q in 2..=kk {
                let Some(e) = eng.emission_op(child[kk - q], q) else { continue };
                let mut ops: Vec<Op> = (1..q).map(|p| eng.residual_op(child[kk - p], p)).collect();
                ops.push(e);
                ops.extend((q + 1..=kk).map(|p| eng.residual_op(child[kk - p], p - 1)));
                acc = acc.add(&eng.chain(&ops, input).map_err(internal)?);
            }
            Ok(acc.scale(eng.word_coeff(&child)))
        })
        .collect::<Result<_, OdeError>>()?;

    // Remainder over depth-ℓ words.
    let remainder_parts: Vec<ExpPoly> = words_of_length(ell)
        .into_par_iter()
        .map(|w| {
            let r0 = &tower[&w].1;
            Ok(eng.chain(&eng.word_chain(&w, 0), r0).map_err(internal)?.scale(eng.word_coeff(&w)))
        })
        .collect::<Result<_, OdeError>>()?;

    let sum =
        |v: Vec<ExpPoly>| ExpPoly::from_terms(v.iter().flat_map(|p| p.terms().iter().copied()).collect::<Vec<_>>());
    let main = sum(main_parts);
    let truncated = main.add(&sum(emission_parts));
    let remainder = sum(remainder_parts);
    let identity = explicit.sub(&truncated).sub(&remainder);
    let identity_residual = identity.max_abs_coeff() / explicit.max_abs_coeff().max(f64::MIN_POSITIVE);

    let coeffs = collect_coefficients(&truncated.prune(PRUNE_TOL), params)?;
    let remainder_samples: Vec<(f64, f64)> = (0..=(SAMPLE_END / SAMPLE_STEP).round() as usize)
        .map(|k| {
            let t = k as f64 * SAMPLE_STEP;
            (t, remainder.eval(t).norm())
        })
        .collect();
    let window = match eng.table.regime {
        SqrtDClass::Imaginary => std::f64::consts::PI / params.sqrt_d().im.abs(),
        _ => 0.5,
    };
    let fitted_decay = fit_decay(&remainder_samples, window);
    let report = ExpansionReport {
        coeffs,
        ell,
        ell_plus: eng.table.ell_plus,
        switch: eng.table,
        remainder_samples,
        fitted_decay,
        identity_residual,
        max_complex_divisor: f64::from_bits(eng.divisor_bits.load(Ordering::Relaxed)),
        removed: BTreeSet::new(),
        nu_gamma: None,
    };
    Ok(ExpansionParts { explicit, root_forcing, truncated, remainder, report })
}

fn forcing_of(tower: &HashMap<Vec<u8>, (ExpPoly, ExpPoly)>, w: &[u8]) -> ExpPoly {
    let two = &tower[&[w, &[2]].concat()].0;
    let three = &tower[&[w, &[3]].concat()].0;
    two.scale(C64::new(-SQRT2, 0.0)).sub(&three.shift(C64::new(-1.0, 0.0)))
}

/// OLS slope of `log max_{[t, t+w]} |R|` against `t` over `[FIT_START, SAMPLE_END − w]`.
pub fn fit_decay(samples: &[(f64, f64)], window: f64) -> f64 {
    let end = samples.last().map_or(0.0, |s| s.0);
    let window = if window.is_finite() && window < end - FIT_START - 2.0 { window } else { 0.5 };
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(t, _)| t >= FIT_START - 1e-12 && t <= end - window + 1e-12)
        .filter_map(|&(t, _)| {
            let env = samples
                .iter()
                .filter(|&&(s, _)| s >= t - 1e-12 && s <= t + window + 1e-12)
                .map(|s| s.1)
                .fold(0.0, f64::max);
            (env > 0.0).then(|| (t, env.ln()))
        })
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    crate::spectral_counting::ols_slope(&xs, &ys).unwrap_or(f64::NEG_INFINITY)
}

/// Pure finite chain `Π (J⁺_{A_k} − J⁻_{A_k})` applied to `e^{λ_start t}`, innermost letter last in `word`.
pub fn pure_finite_chain(word: &[u8], start: Sign, params: &OdeParams) -> Result<ExpPoly, OdeError> {
    let eng = Engine::new(params);
    let ops: Vec<Op> = word
        .iter()
        .rev()
        .map(|&i| Op { idx: i as u32, plus: Some(Piece::Finite), minus: Some(Piece::Finite) })
        .collect();
    eng.chain(&ops, &ExpPoly::exp(params.lambda(start)))
}

/// Highest `m` on each branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainDegrees {
    pub minus: Option<u32>,
    pub plus: Option<u32>,
}

/// Degrees in `e^{−t}` of the two branches of a pure finite chain.
pub fn chain_degrees(word: &[u8], start: Sign, params: &OdeParams) -> Result<ChainDegrees, OdeError> {
    let out = pure_finite_chain(word, start, params)?;
    let scale = out.max_abs_coeff();
    let (mut minus, mut plus) = (None, None);
    for t in out.terms().iter().filter(|t| t.coeff.norm() > 1e-12 * scale) {
        let m_of = |s: Sign| {
            let m = params.lambda(s) - t.exponent;
            let r = m.re.round();
            ((m.re - r).abs() < 1e-9 && m.im.abs() < 1e-9 && r >= 0.0).then_some(r as u32)
        };
        if let Some(m) = m_of(Sign::Minus) {
            minus = minus.max(Some(m));
        } else if let Some(m) = m_of(Sign::Plus) {
            plus = plus.max(Some(m));
        } else {
            return Err(OdeError::InexpressibleExponent { exponent: t.exponent });
        }
    }
    Ok(ChainDegrees { minus, plus })
}

/// Number of entries equal to `letter` among positions `x..=y` (one-based).
pub fn delta_count(word: &[u8], letter: u8, x: usize, y: usize) -> usize {
    if x == 0 || x > y {
        return 0;
    }
    word.iter().skip(x - 1).take(y + 1 - x).filter(|&&v| v == letter).count()
}

/// Expected degrees: same branch `ℓ + δ₃(A)`, opposite branch `ℓ − 1 + δ₃(A, 1, ℓ−1)`.
pub fn expected_chain_degrees(word: &[u8], start: Sign) -> ChainDegrees {
    let l = word.len();
    let same = (l + delta_count(word, 3, 1, l)) as u32;
    let other = (l > 0).then(|| (l - 1 + delta_count(word, 3, 1, l - 1)) as u32);
    match start {
        Sign::Minus => ChainDegrees { minus: Some(same), plus: other },
        Sign::Plus => ChainDegrees { minus: other, plus: Some(same) },
    }
}

#[cfg(test)]
mod tests {
    use super::super::coefficients::Branch;
    use super::super::solve::{max_abs_difference, solve_ode_numeric};
    use super::*;
    use crate::Q;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn params(n: usize, d: f64) -> OdeParams {
        OdeParams::from_discriminant(n, d, Q::from_integer(0), c(1.0), c(0.0)).unwrap()
    }

    #[test]
    fn switch_table_values() {
        let t = SwitchTable::for_params(&params(5, -1.0));
        assert_eq!((t.d_plus, t.d_minus, t.ell_plus), (2, 2, 2));
        assert_eq!(t.ell_plus_uniform, 4);
        let t = SwitchTable::for_params(&params(7, 1.0));
        assert_eq!(t.regime, SqrtDClass::RealSmall);
        assert_eq!((t.d_plus, t.d_minus), (6, 2));
        let t = SwitchTable::for_params(&params(5, 1.5f64.powi(2) + 0.1));
        assert_eq!(t.regime, SqrtDClass::RealMid);
        assert_eq!(t.d_minus, 0);
        let t = SwitchTable::for_params(&params(5, 4.0));
        assert!(t.plus_vanishes);
    }

    #[test]
    fn delta_counts() {
        let w = [2u8, 3, 3, 2, 3];
        assert_eq!(delta_count(&w, 3, 1, 5), 3);
        assert_eq!(delta_count(&w, 2, 1, 5), 2);
        assert_eq!(delta_count(&w, 3, 2, 3), 2);
        assert_eq!(delta_count(&w, 3, 1, 0), 0);
    }

    #[test]
    fn zero_forcing_scalars_give_homogeneous_solution() {
        let p = params(5, -1.0);
        let theta = |w: &[u8]| if w.is_empty() { (c(1.0), c(-0.5)) } else { (c(0.0), c(0.0)) };
        let parts = expand_iterated_parts(&p, &theta, 3).unwrap();
        let hom = ExpPoly::exp(p.lambda_minus).add(&ExpPoly::exp(p.lambda_plus).scale(c(-0.5)));
        assert!(parts.explicit.sub(&hom).max_abs_coeff() < 1e-15);
        assert!(parts.report.coeffs.keys().all(|k| k.m == 0));
    }

    #[test]
    fn imaginary_regime_decay_and_identity() {
        let p = params(5, -1.0);
        let parts = expand_iterated_parts(&p, &GeometricTheta::halving(), 6).unwrap();
        let r = &parts.report;
        assert!(r.identity_residual < 1e-10, "{}", r.identity_residual);
        let bound = p.lambda_minus.re - (6.0 - r.ell_plus as f64 - 1.0) + 0.2;
        assert!(r.fitted_decay <= bound, "{} > {}", r.fitted_decay, bound);
        assert!(r.max_complex_divisor < 1.0);
        assert!(r.coeffs.keys().all(|k| k.m <= 12 && k.branch != Branch::Polynomial));
    }

    #[test]
    fn explicit_tower_solves_its_ode() {
        let p = params(5, -1.0);
        let parts = expand_iterated_parts(&p, &GeometricTheta::halving(), 3).unwrap();
        let y = &parts.explicit;
        let q = p.with_initial(y.eval(0.0), y.derivative().eval(0.0));
        let g = parts.root_forcing.clone();
        let rk = solve_ode_numeric(&q, |t| g.eval(t), 10.0, 20_000).unwrap();
        assert!(max_abs_difference(y, &rk) < 1e-8);
    }

    #[test]
    fn decay_improves_with_depth() {
        let p = params(5, -1.0);
        let fits: Vec<f64> =
            (3..=6).map(|l| expand_iterated(&p, &GeometricTheta::halving(), l).unwrap().fitted_decay).collect();
        for w in fits.windows(2) {
            assert!(w[1] <= w[0] - 0.8, "{fits:?}");
        }
    }

    #[test]
    fn all_regimes_expand() {
        for (n, d) in [(5, -2.0), (7, 1.0), (6, 0.09), (5, 2.5), (5, 4.2), (5, 0.0), (4, 0.0)] {
            let p = params(n, d);
            let ell = SwitchTable::for_params(&p).ell_plus + 2;
            let r = expand_iterated(&p, &GeometricTheta::halving(), ell).unwrap_or_else(|e| panic!("n={n} d={d}: {e}"));
            assert!(r.identity_residual < 1e-9, "n={n} d={d}: {}", r.identity_residual);
            if SwitchTable::for_params(&p).plus_vanishes {
                assert!(r.coeffs.keys().all(|k| k.branch != Branch::Plus));
            }
        }
    }

    #[test]
    fn ell_must_exceed_switch_depth() {
        let p = params(5, -1.0);
        assert!(matches!(
            expand_iterated(&p, &GeometricTheta::halving(), 2),
            Err(OdeError::EllTooSmall { ell: 2, required: 3 })
        ));
    }

    #[test]
    fn chain_degree_bookkeeping() {
        for n in [3usize, 5, 7] {
            let p = params(n, -1.3);
            for l in 1..=5 {
                for w in words_of_length(l) {
                    for s in Sign::BOTH {
                        assert_eq!(chain_degrees(&w, s, &p).unwrap(), expected_chain_degrees(&w, s), "n={n} w={w:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let p = params(5, -1.0);
        let r = expand_iterated(&p, &GeometricTheta::halving(), 3).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let pos: Vec<usize> =
            ["\"coeffs\"", "\"ell\"", "\"fitted_decay\"", "\"remainder\""].iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(s.starts_with("{\"coeffs\":[{\"branch\":"));
        assert!(r.remainder_csv().unwrap().starts_with("t,abs\n"));
    }
}
