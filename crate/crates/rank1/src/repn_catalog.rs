//! Exact highest-weight arithmetic for `K = SO(n)`, `M = SO(n−1)` and the
//! unitary series of `G = SO(n,1)`: Casimir eigenvalues, branching,
//! discriminant data and the admissibility and Sobolev-shift identities.
//!
//! Weights live in the ε-coordinates with the Euclidean inner product. For
//! `SO(m)` the half-sum of positive roots is `σ_i = m/2 − i` (1-based `i`).

use crate::{C64, Q};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use thiserror::Error;

/// Errors from representation-theoretic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepnError {
    #[error("weight {coords:?} has length {len}, SO({m}) needs {want}")]
    Length { coords: Vec<Q>, len: usize, m: usize, want: usize },
    #[error("weight {0:?} is not dominant for SO({1})")]
    NonDominant(Vec<Q>, usize),
    #[error("weight {0:?} mixes integers and half-odd integers, or has other denominators")]
    Parity(Vec<Q>),
    #[error("weight is for SO({got}), expected SO({want})")]
    WrongGroup { got: usize, want: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("inconsistent discriminant: ρ² − (ϖ − μ) = {d1}, ν² + ϖ̂ − ϖ = {d2}")]
    Inconsistent { d1: f64, d2: f64 },
    #[error("M-weight {eta:?} does not occur in the K-type {tau:?}")]
    NonBranching { tau: Vec<Q>, eta: Vec<Q> },
    #[error("Sobolev base 1 − μ + 2τ(Ω_K) = {0} is not positive")]
    NonPositiveBase(f64),
    #[error("internal invariant `{name}` violated: {detail}")]
    Internal { name: &'static str, detail: String },
}

/// Serializes a rational as `{num, den}`.
pub fn ser_q<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    RationalJson::from(*q).serialize(s)
}

fn ser_q_vec<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| RationalJson::from(*q)))
}

/// JSON form of an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl From<Q> for RationalJson {
    fn from(q: Q) -> Self {
        Self { num: *q.numer(), den: *q.denom() }
    }
}

/// A number that is exact when the parameters allow it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Real(f64),
}

impl Scalar {
    pub fn to_f64(self) -> f64 {
        match self {
            Self::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Self::Real(x) => x,
        }
    }

    pub fn exact(self) -> Option<Q> {
        match self {
            Self::Exact(q) => Some(q),
            Self::Real(_) => None,
        }
    }

    fn map2(self, other: Self, fq: impl Fn(Q, Q) -> Q, ff: impl Fn(f64, f64) -> f64) -> Self {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => Self::Exact(fq(a, b)),
            (a, b) => Self::Real(ff(a.to_f64(), b.to_f64())),
        }
    }

    fn cmp_zero(self) -> Ordering {
        match self {
            Self::Exact(q) => q.cmp(&Q::zero()),
            Self::Real(x) => x.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }
}

impl std::ops::Add for Scalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.map2(o, |a, b| a + b, |a, b| a + b)
    }
}

impl std::ops::Sub for Scalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.map2(o, |a, b| a - b, |a, b| a - b)
    }
}

impl std::ops::Mul for Scalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.map2(o, |a, b| a * b, |a, b| a * b)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            Self::Exact(q) => Self::Exact(-q),
            Self::Real(x) => Self::Real(-x),
        }
    }
}

impl From<Q> for Scalar {
    fn from(q: Q) -> Self {
        Self::Exact(q)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Self::Exact(Q::from_integer(v))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Exact(q) => ser_q(q, s),
            Self::Real(x) => s.serialize_f64(*x),
        }
    }
}

fn q(v: i64) -> Q {
    Q::from_integer(v)
}

fn half() -> Q {
    Q::new(1, 2)
}

/// A dominant weight of `SO(m)`, `m ≥ 2`, with `⌊m/2⌋` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HighestWeight {
    #[serde(serialize_with = "ser_q_vec")]
    coords: Vec<Q>,
    /// Ambient group `SO(m)`.
    m: usize,
}

impl HighestWeight {
    /// Validates length, dominance and parity.
    pub fn new(coords: Vec<Q>, m: usize) -> Result<Self, RepnError> {
        let want = m / 2;
        if m < 2 || coords.len() != want {
            return Err(RepnError::Length { len: coords.len(), coords, m, want });
        }
        let integral = coords.iter().all(|c| c.is_integer());
        let half_odd = coords.iter().all(|c| *c.denom() == 2);
        if !(integral || half_odd) {
            return Err(RepnError::Parity(coords));
        }
        let p = coords.len();
        let ordered = coords.windows(2).enumerate().all(|(i, w)| {
            if m.is_multiple_of(2) && i + 2 == p {
                w[0] >= w[1].abs()
            } else {
                w[0] >= w[1]
            }
        });
        let last_ok = m.is_multiple_of(2) || coords[p - 1] >= Q::zero();
        if !(ordered && last_ok) {
            return Err(RepnError::NonDominant(coords, m));
        }
        Ok(Self { coords, m })
    }

    pub fn from_ints(v: &[i64], m: usize) -> Result<Self, RepnError> {
        Self::new(v.iter().map(|&x| q(x)).collect(), m)
    }

    /// Entries given as numerators over 2.
    pub fn from_halves(v: &[i64], m: usize) -> Result<Self, RepnError> {
        Self::new(v.iter().map(|&x| Q::new(x, 2)).collect(), m)
    }

    pub fn trivial(m: usize) -> Self {
        Self { coords: vec![Q::zero(); m / 2], m }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn group(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Smallest 1-based index with a zero coordinate, or `rank + 1`.
    pub fn first_zero_index(&self) -> usize {
        self.coords.iter().position(|c| c.is_zero()).map_or(self.rank() + 1, |i| i + 1)
    }
}

/// Half-sum of positive roots of `SO(m)`.
pub fn rho_vector(m: usize) -> Vec<Q> {
    (1..=m / 2).map(|i| Q::new(m as i64 - 2 * i as i64, 2)).collect()
}

fn check_group(w: &HighestWeight, m: usize) -> Result<(), RepnError> {
    if w.m != m {
        return Err(RepnError::WrongGroup { got: w.m, want: m });
    }
    Ok(())
}

fn shifted_norm_difference(w: &HighestWeight) -> Q {
    rho_vector(w.m).iter().zip(&w.coords).map(|(s, l)| (l + s) * (l + s) - s * s).sum()
}

/// `τ(Ω_K) = |Λ+σ|² − |σ|²` for `K = SO(n)`.
pub fn casimir_k(lambda: &HighestWeight, n: usize) -> Result<Q, RepnError> {
    check_group(lambda, n)?;
    Ok(shifted_norm_difference(lambda))
}

/// `η(Ω_M) = Σ b_i (b_i + n − 2i − 1)` for `M = SO(n−1)`.
pub fn casimir_m(lambda: &HighestWeight, n: usize) -> Result<Q, RepnError> {
    check_group(lambda, n - 1)?;
    Ok(lambda.coords.iter().enumerate().map(|(i, b)| b * (b + q(n as i64 - 2 * (i as i64 + 1) - 1))).sum())
}

/// Interlacing test between a `K`-weight and an `M`-weight.
pub fn interlaces(tau: &HighestWeight, eta: &HighestWeight, n: usize) -> bool {
    if tau.m != n || eta.m != n - 1 || tau.is_integral() != eta.is_integral() {
        return false;
    }
    let (a, b) = (&tau.coords, &eta.coords);
    if n.is_multiple_of(2) {
        let p = a.len();
        (0..p - 1).all(|i| a[i] >= b[i] && b[i] >= if i + 1 == p - 1 { a[p - 1].abs() } else { a[i + 1] })
    } else {
        let p = a.len();
        (0..p).all(|i| {
            let lower = if i + 1 < p { a[i + 1] } else { Q::zero() };
            if i + 1 < p {
                a[i] >= b[i] && b[i] >= lower
            } else {
                a[i] >= b[i].abs()
            }
        })
    }
}

/// All `M`-types in the `K`-type `τ`, each with multiplicity one, lexicographically ascending.
pub fn branch_k_to_m(tau: &HighestWeight, n: usize) -> Result<Vec<HighestWeight>, RepnError> {
    check_group(tau, n)?;
    let a = &tau.coords;
    let rank_m = (n - 1) / 2;
    let ranges: Vec<(Q, Q)> = (0..rank_m)
        .map(|i| {
            if n.is_multiple_of(2) {
                let lo = if i + 1 == rank_m { a[i + 1].abs() } else { a[i + 1] };
                (lo, a[i])
            } else if i + 1 < rank_m {
                (a[i + 1], a[i])
            } else {
                (-a[i], a[i])
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(rank_m);
    fn rec(ranges: &[(Q, Q)], cur: &mut Vec<Q>, out: &mut Vec<Vec<Q>>) {
        if cur.len() == ranges.len() {
            out.push(cur.clone());
            return;
        }
        let (lo, hi) = ranges[cur.len()];
        let mut v = lo;
        while v <= hi {
            cur.push(v);
            rec(ranges, cur, out);
            cur.pop();
            v += 1;
        }
    }
    rec(&ranges, &mut cur, &mut out);
    let mut weights = out
        .into_iter()
        .map(|c| HighestWeight::new(c, n - 1))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RepnError::Internal { name: "branch_dominance", detail: e.to_string() })?;
    weights.sort();
    Ok(weights)
}

/// `τ(Ω_K) − η(Ω_M)` from the telescoped sum; checked against the direct difference.
pub fn km_casimir_gap(tau: &HighestWeight, eta: &HighestWeight, n: usize) -> Result<Q, RepnError> {
    check_group(tau, n)?;
    check_group(eta, n - 1)?;
    if !interlaces(tau, eta, n) {
        return Err(RepnError::NonBranching { tau: tau.coords.clone(), eta: eta.coords.clone() });
    }
    let (a, b) = (&tau.coords, &eta.coords);
    let l = a.len() as i64;
    let gap: Q = if n % 2 == 1 {
        (0..a.len())
            .map(|k| {
                let i = k as i64 + 1;
                (a[k] - b[k]) * (a[k] + b[k] + q(2 * (l - i))) + a[k]
            })
            .sum()
    } else {
        let head: Q = (0..b.len())
            .map(|k| {
                let i = k as i64 + 1;
                (a[k] - b[k]) * (a[k] + b[k] + q(2 * (l - i))) + b[k]
            })
            .sum();
        head + a[a.len() - 1] * a[a.len() - 1]
    };
    let direct = casimir_k(tau, n)? - casimir_m(eta, n)?;
    if gap != direct || gap < Q::zero() {
        return Err(RepnError::Internal { name: "km_gap", detail: format!("telescoped {gap} vs direct {direct}") });
    }
    Ok(gap)
}

/// Parameters of an irreducible unitary representation of `SO(n,1)` induced from `η`.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesParam {
    /// `ν = i s`, `s ≥ 0`.
    Principal { s: Scalar, eta: HighestWeight },
    /// Real `ν` in the open interval fixed by `j`.
    Complementary { nu: Scalar, eta: HighestWeight },
    /// `ν = (n+1)/2 − j + m`.
    EndPoint { m: i64, eta: HighestWeight },
    /// `n = 2p`: `ν = −1/2` when `s` is `None`, else `ν = −s − 1/2`.
    Discrete { s: Option<Q>, eta: HighestWeight },
}

impl SeriesParam {
    pub fn eta(&self) -> &HighestWeight {
        match self {
            Self::Principal { eta, .. }
            | Self::Complementary { eta, .. }
            | Self::EndPoint { eta, .. }
            | Self::Discrete { eta, .. } => eta,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Principal { .. } => "principal",
            Self::Complementary { .. } => "complementary",
            Self::EndPoint { .. } => "endpoint",
            Self::Discrete { .. } => "discrete",
        }
    }

    /// `⟨ν,ν⟩`, negative for the principal series.
    pub fn nu_squared(&self, n: usize) -> Scalar {
        match self {
            Self::Principal { s, .. } => -(*s * *s),
            Self::Complementary { nu, .. } => *nu * *nu,
            Self::EndPoint { m, eta } => {
                let nu = Q::new(n as i64 + 1, 2) - q(eta.first_zero_index() as i64) + q(*m);
                Scalar::Exact(nu * nu)
            }
            Self::Discrete { s, .. } => {
                let nu = -s.unwrap_or(Q::zero()) - half();
                Scalar::Exact(nu * nu)
            }
        }
    }

    /// Checks the admissible parameter ranges, naming the violated bound.
    pub fn validate(&self, n: usize) -> Result<(), RepnError> {
        if n < 3 {
            return Err(RepnError::OutOfRange(format!("n = {n} < 3")));
        }
        let eta = self.eta();
        check_group(eta, n - 1)?;
        let p = n / 2;
        let b = eta.coords();
        let j = eta.first_zero_index();
        let upper = Q::new(n as i64 + 1, 2) - q(j as i64);
        let oor = |s: String| Err(RepnError::OutOfRange(s));
        match self {
            Self::Principal { s, .. } => {
                if s.cmp_zero() == Ordering::Less {
                    return oor(format!("principal s = {} < 0", s.to_f64()));
                }
                if s.cmp_zero() == Ordering::Equal && n.is_multiple_of(2) && !b[p - 2].is_integer() {
                    return oor("principal s = 0 with half-odd Λ_{η,p−1} for n = 2p is excluded".into());
                }
            }
            Self::Complementary { nu, .. } => {
                let hi = if n % 2 == 1 {
                    if !b[p - 1].is_zero() {
                        return oor("complementary series for n = 2p+1 needs Λ_{η,p} = 0".into());
                    }
                    upper
                } else if !b[p - 2].is_zero() {
                    if !b[p - 2].is_integer() {
                        return oor("complementary series needs Λ_{η,p−1} ∈ ℤ".into());
                    }
                    half()
                } else {
                    upper
                };
                let inside = match nu {
                    Scalar::Exact(v) => *v > Q::zero() && *v < hi,
                    Scalar::Real(v) => *v > 0.0 && *v < hi.to_f64().unwrap_or(0.0),
                };
                if !inside {
                    return oor(format!("complementary ν = {} outside (0, {hi})", nu.to_f64()));
                }
            }
            Self::EndPoint { m, .. } => {
                let jmax = if n % 2 == 1 { p } else { p - 1 };
                if j > jmax {
                    return oor(format!("end-point series needs j ≤ {jmax}, got j = {j}"));
                }
                if *m < 0 {
                    return oor(format!("end-point m = {m} < 0"));
                }
                if j >= 2 && q(*m) > b[j - 2] {
                    return oor(format!("end-point m = {m} > Λ_{{η,j−1}} = {}", b[j - 2]));
                }
            }
            Self::Discrete { s, .. } => {
                if n % 2 == 1 {
                    return oor("discrete series needs n even".into());
                }
                let lam = b[p - 2];
                match s {
                    None => {
                        if !lam.is_integer() || lam < Q::zero() {
                            return oor("discrete series ν = −1/2 needs Λ_{η,p−1} ∈ ℤ≥0".into());
                        }
                    }
                    Some(s) => {
                        if lam.is_zero() {
                            return oor("shifted discrete series needs Λ_{η,p−1} ≠ 0".into());
                        }
                        if !(*s - lam).is_integer() {
                            return oor(format!("s − Λ_{{η,p−1}} = {} ∉ ℤ", *s - lam));
                        }
                        if *s < -lam.abs() || *s > lam.abs() {
                            return oor(format!("s = {s} outside [−{0}, {0}]", lam.abs()));
                        }
                        if -*s - half() < Q::zero() {
                            return oor(format!("ν = −s − 1/2 = {} < 0", -*s - half()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `ρ² = (n−1)²/4`.
pub fn rho_squared(n: usize) -> Q {
    Q::new((n as i64 - 1) * (n as i64 - 1), 4)
}

/// Casimir eigenvalue of a series representation, from the per-series closed forms.
pub fn casimir_g_series(p: &SeriesParam, n: usize) -> Result<Scalar, RepnError> {
    p.validate(n)?;
    let varpi_hat = Scalar::Exact(casimir_m(p.eta(), n)?);
    let nn = n as i64;
    let head = match p {
        SeriesParam::Principal { s, .. } => -(*s * *s) - Scalar::Exact(rho_squared(n)),
        SeriesParam::Complementary { nu, .. } => *nu * *nu - Scalar::Exact(rho_squared(n)),
        SeriesParam::EndPoint { m, eta } => {
            let j = eta.first_zero_index() as i64;
            Scalar::from((m + 1 - j) * (m + nn - j))
        }
        SeriesParam::Discrete { s, .. } => {
            let pp = q(nn / 2);
            match s {
                None => Scalar::Exact(-pp * (pp - 1)),
                Some(s) => Scalar::Exact((s + pp) * (s - pp + 1)),
            }
        }
    };
    Ok(head + varpi_hat)
}

/// `⟨ν,ν⟩ + ϖ̂ − ρ²`.
pub fn general_casimir(nu_sq: Scalar, varpi_hat: Q, n: usize) -> Scalar {
    nu_sq + Scalar::Exact(varpi_hat - rho_squared(n))
}

/// Position of `√D` relative to the thresholds `(n−3)/2` and `(n−1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqrtDClass {
    Imaginary,
    Zero,
    /// `0 < √D ≤ (n−3)/2`.
    RealSmall,
    /// `(n−3)/2 < √D < (n−1)/2`.
    RealMid,
    /// `√D ≥ (n−1)/2`.
    RealLarge,
}

/// Discriminant data of the rank-one ODE attached to `(μ, ϖ)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDatum {
    pub n: usize,
    pub mu: Scalar,
    #[serde(serialize_with = "ser_q")]
    pub varpi: Q,
    #[serde(serialize_with = "ser_q")]
    pub varpi_hat: Q,
    pub nu_sq: Scalar,
    /// `ρ² − (ϖ − μ)`.
    pub d: Scalar,
    /// `ν² + ϖ̂ − ϖ`.
    pub d_alt: Scalar,
    #[serde(serialize_with = "crate::ser_c64")]
    pub sqrt_d: C64,
    pub sqrt_d_class: SqrtDClass,
    /// `2√D ∈ ℤ`.
    pub half_integer_flag: bool,
    #[serde(serialize_with = "crate::ser_c64")]
    pub lambda_plus: C64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub lambda_minus: C64,
}

impl SpectralDatum {
    pub fn d_f64(&self) -> f64 {
        self.d.to_f64()
    }
}

fn exact_sqrt(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|x| *x >= 0 && x * x == v)
}

/// Classifies `√D` and flags `2√D ∈ ℤ`.
pub fn classify_sqrt_d(d: Scalar, n: usize) -> (SqrtDClass, bool) {
    let small = Q::new(n as i64 - 3, 2);
    let large = Q::new(n as i64 - 1, 2);
    match d {
        Scalar::Exact(d) => {
            let class = if d < Q::zero() {
                SqrtDClass::Imaginary
            } else if d.is_zero() {
                SqrtDClass::Zero
            } else if d <= small * small {
                SqrtDClass::RealSmall
            } else if d < large * large {
                SqrtDClass::RealMid
            } else {
                SqrtDClass::RealLarge
            };
            // 2√D ∈ ℤ iff 4D is a perfect square integer.
            let four = d * 4;
            let flag = four.is_integer() && exact_sqrt(four.to_integer()).is_some();
            (class, flag)
        }
        Scalar::Real(d) => {
            let tol = 1e-10 * (1.0 + d.abs());
            let s = d.abs().sqrt();
            let class = if d.abs() <= tol {
                SqrtDClass::Zero
            } else if d < 0.0 {
                SqrtDClass::Imaginary
            } else if s <= small.to_f64().unwrap() + 1e-10 {
                SqrtDClass::RealSmall
            } else if s < large.to_f64().unwrap() - 1e-10 {
                SqrtDClass::RealMid
            } else {
                SqrtDClass::RealLarge
            };
            let flag = d >= -tol && ((2.0 * s) - (2.0 * s).round()).abs() < 1e-9;
            (class, flag)
        }
    }
}

/// Builds [`SpectralDatum`] from both discriminant formulas and checks that they agree.
pub fn discriminant_data(
    mu: Scalar,
    varpi: Q,
    varpi_hat: Q,
    nu_sq: Scalar,
    n: usize,
) -> Result<SpectralDatum, RepnError> {
    let d1 = Scalar::Exact(rho_squared(n) - varpi) + mu;
    let d2 = nu_sq + Scalar::Exact(varpi_hat - varpi);
    let agree = match (d1, d2) {
        (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
        (a, b) => (a.to_f64() - b.to_f64()).abs() <= 1e-10 * (1.0 + a.to_f64().abs()),
    };
    if !agree {
        return Err(RepnError::Inconsistent { d1: d1.to_f64(), d2: d2.to_f64() });
    }
    let (class, flag) = classify_sqrt_d(d1, n);
    let df = d1.to_f64();
    let sqrt_d = if class == SqrtDClass::Zero { C64::new(0.0, 0.0) } else { C64::new(df, 0.0).sqrt() };
    let base = C64::new((1.0 - n as f64) / 2.0, 0.0);
    Ok(SpectralDatum {
        n,
        mu,
        varpi,
        varpi_hat,
        nu_sq,
        d: d1,
        d_alt: d2,
        sqrt_d,
        sqrt_d_class: class,
        half_integer_flag: flag,
        lambda_plus: base + sqrt_d,
        lambda_minus: base - sqrt_d,
    })
}

/// [`SpectralDatum`] of a series representation paired with an `M`-type of Casimir `ϖ`.
pub fn series_datum(p: &SeriesParam, varpi: Q, n: usize) -> Result<SpectralDatum, RepnError> {
    let mu = casimir_g_series(p, n)?;
    let varpi_hat = casimir_m(p.eta(), n)?;
    discriminant_data(mu, varpi, varpi_hat, p.nu_squared(n), n)
}

/// `λ = −μ + τ(Ω_K)` and whether `λ ≥ −1e−12`.
pub fn admissibility_check(mu: f64, tau_casimir: Q) -> (f64, bool) {
    let lambda = -mu + tau_casimir.to_f64().unwrap_or(f64::NAN);
    (lambda, lambda >= -1e-12)
}

/// `(1 − μ + 2τ(Ω_K))^k · ‖·‖²`.
pub fn sobolev_shift(norm_sq: f64, mu: f64, tau_casimir: Q, k: u32) -> Result<f64, RepnError> {
    let base = 1.0 - mu + 2.0 * tau_casimir.to_f64().unwrap_or(f64::NAN);
    if base.is_nan() || base <= 0.0 {
        return Err(RepnError::NonPositiveBase(base));
    }
    Ok(base.powi(k as i32) * norm_sq)
}

/// Which truncation orders to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationVariant {
    /// `m_± = ℓ − n ± ⌊√D⌋ − 1_{√D∈ℤ}`.
    PlusMinus,
    /// `m_± = ℓ − n − ⌊√D⌋ − 1_{√D∈ℤ}` for both signs.
    BothMinus,
}

/// Truncation orders `(m_+, m_−)` for real nonzero `√D`.
pub fn truncation_orders(ell: i64, n: usize, sqrt_d: f64, variant: TruncationVariant) -> (i64, i64) {
    let fl = sqrt_d.floor() as i64;
    let ind = i64::from((sqrt_d - sqrt_d.round()).abs() < 1e-12);
    let minus = ell - n as i64 - fl - ind;
    match variant {
        TruncationVariant::PlusMinus => (ell - n as i64 + fl - ind, minus),
        TruncationVariant::BothMinus => (minus, minus),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_counting::{enumerate_k_types, weyl_dimension, WeightLattice};
    use proptest::prelude::*;

    fn hw(v: &[i64], m: usize) -> HighestWeight {
        HighestWeight::from_ints(v, m).unwrap()
    }

    #[test]
    fn weight_validation() {
        assert!(HighestWeight::from_ints(&[0, 1], 5).is_err());
        assert!(HighestWeight::from_ints(&[1, -1], 5).is_err());
        assert!(HighestWeight::from_ints(&[1, -1], 4).is_ok());
        assert!(HighestWeight::from_ints(&[1], 4).is_err());
        assert!(HighestWeight::new(vec![Q::new(1, 2), q(0)], 4).is_err());
        assert!(HighestWeight::new(vec![Q::new(1, 3)], 3).is_err());
        assert!(HighestWeight::from_halves(&[1, -1], 4).is_ok());
        assert!(HighestWeight::from_ints(&[-3], 2).is_ok());
    }

    #[test]
    fn casimir_examples() {
        assert_eq!(casimir_k(&hw(&[0], 3), 3).unwrap(), q(0));
        assert_eq!(casimir_k(&hw(&[1], 3), 3).unwrap(), q(2));
        assert_eq!(casimir_k(&hw(&[1, 0], 4), 4).unwrap(), q(3));
        assert_eq!(casimir_k(&hw(&[1, 0], 5), 5).unwrap(), q(4));
        assert_eq!(casimir_m(&hw(&[0, 0], 4), 5).unwrap(), q(0));
        assert_eq!(casimir_m(&hw(&[1, 0], 4), 5).unwrap(), q(3));
        assert_eq!(casimir_m(&hw(&[1], 3), 4).unwrap(), q(2));
        assert_eq!(casimir_k(&HighestWeight::from_halves(&[1, 1], 4).unwrap(), 4).unwrap(), Q::new(3, 2));
        assert!(casimir_k(&hw(&[1], 3), 4).is_err());
    }

    #[test]
    fn casimir_m_matches_shifted_norm() {
        for n in 3..=8 {
            for w in enumerate_k_types(n - 1, 30.0, WeightLattice::WithSpin) {
                assert_eq!(casimir_m(&w, n).unwrap(), shifted_norm_difference(&w));
            }
        }
    }

    #[test]
    fn branching_examples() {
        assert_eq!(branch_k_to_m(&hw(&[0, 0], 5), 5).unwrap(), vec![hw(&[0, 0], 4)]);
        assert_eq!(branch_k_to_m(&hw(&[1, 0], 5), 5).unwrap(), vec![hw(&[0, 0], 4), hw(&[1, 0], 4)]);
        assert_eq!(branch_k_to_m(&hw(&[1, 1], 4), 4).unwrap(), vec![hw(&[1], 3)]);
        assert_eq!(branch_k_to_m(&hw(&[1], 3), 3).unwrap(), vec![hw(&[-1], 2), hw(&[0], 2), hw(&[1], 2)]);
    }

    /// Brute force over a box, independent of the range construction.
    fn brute_branch(tau: &HighestWeight, n: usize) -> Vec<HighestWeight> {
        let r = (n - 1) / 2;
        let top = tau.coords()[0];
        let offset = if tau.is_integral() { Q::zero() } else { half() };
        let span = top.to_integer() + 1;
        let mut out = Vec::new();
        let total = (2 * span + 1).pow(r as u32);
        for code in 0..total {
            let mut c = code;
            let coords: Vec<Q> = (0..r)
                .map(|_| {
                    let v = c % (2 * span + 1) - span;
                    c /= 2 * span + 1;
                    q(v) + offset
                })
                .collect();
            if let Ok(w) = HighestWeight::new(coords, n - 1) {
                if interlaces(tau, &w, n) {
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn branching_matches_brute_force_and_dimensions() {
        for n in 3..=7 {
            for tau in enumerate_k_types(n, 40.0, WeightLattice::WithSpin) {
                let br = branch_k_to_m(&tau, n).unwrap();
                assert_eq!(br, brute_branch(&tau, n), "n={n} tau={tau:?}");
                if n >= 4 {
                    let dims: u64 = br.iter().map(|e| weyl_dimension(e).unwrap()).sum();
                    assert_eq!(dims, weyl_dimension(&tau).unwrap(), "n={n} tau={tau:?}");
                }
                for eta in &br {
                    assert_eq!(eta.is_integral(), tau.is_integral());
                    let gap = km_casimir_gap(&tau, eta, n).unwrap();
                    assert!(gap >= Q::zero());
                }
            }
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(km_casimir_gap(&hw(&[0, 0], 5), &hw(&[0, 0], 4), 5).unwrap(), q(0));
        assert_eq!(km_casimir_gap(&hw(&[1, 0], 5), &hw(&[0, 0], 4), 5).unwrap(), q(4));
        assert!(matches!(km_casimir_gap(&hw(&[1, 0], 5), &hw(&[2, 0], 4), 5), Err(RepnError::NonBranching { .. })));
    }

    #[test]
    fn series_examples() {
        let t3 = HighestWeight::trivial(2);
        let t5 = HighestWeight::trivial(4);
        let mu = casimir_g_series(&SeriesParam::Principal { s: 0.into(), eta: t3.clone() }, 3).unwrap();
        assert_eq!(mu, Scalar::Exact(q(-1)));
        let mu = casimir_g_series(&SeriesParam::Principal { s: 2.into(), eta: t5.clone() }, 5).unwrap();
        assert_eq!(mu, Scalar::Exact(q(-8)));
        // Complementary, n = 5, trivial η: j = 1, ν ∈ (0, 2).
        let ok = SeriesParam::Complementary { nu: Scalar::Exact(Q::new(3, 2)), eta: t5.clone() };
        assert_eq!(casimir_g_series(&ok, 5).unwrap(), Scalar::Exact(Q::new(9, 4) - 4));
        let bad = SeriesParam::Complementary { nu: 2.into(), eta: t5.clone() };
        match casimir_g_series(&bad, 5) {
            Err(RepnError::OutOfRange(msg)) => assert!(msg.contains("(0, 2)"), "{msg}"),
            other => panic!("{other:?}"),
        }
        // Even n with Λ_{η,p−1} ≠ 0 shrinks the interval to (0, 1/2).
        let eta = hw(&[1], 3);
        assert!(casimir_g_series(&SeriesParam::Complementary { nu: Scalar::Exact(Q::new(1, 4)), eta: eta.clone() }, 4)
            .is_ok());
        assert!(casimir_g_series(&SeriesParam::Complementary { nu: Scalar::Exact(Q::new(3, 4)), eta }, 4).is_err());
        // End point, n = 5, trivial η, m = 0: ν = 2, μ = 0 (trivial representation).
        assert_eq!(casimir_g_series(&SeriesParam::EndPoint { m: 0, eta: t5.clone() }, 5).unwrap(), Scalar::Exact(q(0)));
        assert!(casimir_g_series(&SeriesParam::EndPoint { m: 2, eta: hw(&[1, 0], 4) }, 5).is_err());
        assert!(casimir_g_series(&SeriesParam::EndPoint { m: 1, eta: hw(&[1, 0], 4) }, 5).is_ok());
        // Discrete, n = 4: ν = −1/2 gives ν² − ρ² = −p(p−1) = −2.
        let d = casimir_g_series(&SeriesParam::Discrete { s: None, eta: HighestWeight::trivial(3) }, 4).unwrap();
        assert_eq!(d, Scalar::Exact(q(-2)));
        assert!(casimir_g_series(&SeriesParam::Discrete { s: None, eta: HighestWeight::trivial(4) }, 5).is_err());
        let d = casimir_g_series(&SeriesParam::Discrete { s: Some(q(-1)), eta: hw(&[2], 3) }, 4).unwrap();
        assert_eq!(d, Scalar::Exact(q((-1 - 2 + 1) + 2 * (2 + 1))));
        assert!(casimir_g_series(&SeriesParam::Discrete { s: Some(q(1)), eta: hw(&[2], 3) }, 4).is_err());
        assert!(casimir_g_series(&SeriesParam::Principal { s: Scalar::Real(-0.1), eta: t3 }, 3).is_err());
    }

    fn series_instances(n: usize) -> Vec<SeriesParam> {
        let mut out = Vec::new();
        for eta in enumerate_k_types(n - 1, 20.0, WeightLattice::WithSpin) {
            for s in [Scalar::from(0), Scalar::Exact(Q::new(3, 2)), Scalar::Real(std::f64::consts::PI)] {
                out.push(SeriesParam::Principal { s, eta: eta.clone() });
            }
            for nu in [Q::new(1, 5), Q::new(1, 3), Q::new(3, 2), q(2)] {
                out.push(SeriesParam::Complementary { nu: Scalar::Exact(nu), eta: eta.clone() });
            }
            for m in 0..4 {
                out.push(SeriesParam::EndPoint { m, eta: eta.clone() });
            }
            out.push(SeriesParam::Discrete { s: None, eta: eta.clone() });
            if let Some(top) = eta.coords().last() {
                let mut s = -*top;
                while s <= *top {
                    out.push(SeriesParam::Discrete { s: Some(s), eta: eta.clone() });
                    s += 1;
                }
            }
        }
        out.into_iter().filter(|p| p.validate(n).is_ok()).collect()
    }

    #[test]
    fn general_casimir_formula_and_dual_discriminant() {
        for n in 3..=7 {
            let inst = series_instances(n);
            assert!(!inst.is_empty());
            for p in inst {
                let mu = casimir_g_series(&p, n).unwrap();
                let general = general_casimir(p.nu_squared(n), casimir_m(p.eta(), n).unwrap(), n);
                match (mu, general) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => assert_eq!(a, b, "{p:?}"),
                    (a, b) => assert!((a.to_f64() - b.to_f64()).abs() < 1e-10),
                }
                for varpi in [q(0), q(2), Q::new(15, 4)] {
                    let d = series_datum(&p, varpi, n).unwrap();
                    if let (Some(a), Some(b)) = (d.d.exact(), d.d_alt.exact()) {
                        assert_eq!(a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn discriminant_examples() {
        let d = discriminant_data(Scalar::from(-5), q(0), q(0), Scalar::from(-4), 3).unwrap();
        assert_eq!(d.d, Scalar::Exact(q(-4)));
        assert_eq!(d.sqrt_d_class, SqrtDClass::Imaginary);
        assert!((d.lambda_plus - C64::new(-1.0, 2.0)).norm() < 1e-15);
        assert!((d.lambda_minus - C64::new(-1.0, -2.0)).norm() < 1e-15);
        let d = discriminant_data(Scalar::from(-1), q(0), q(0), Scalar::from(0), 3).unwrap();
        assert_eq!(d.sqrt_d_class, SqrtDClass::Zero);
        assert!(d.half_integer_flag);
        assert_eq!(d.lambda_plus, C64::new(-1.0, 0.0));
        let d = discriminant_data(Scalar::from(-4), q(0), q(0), Scalar::from(0), 5).unwrap();
        assert_eq!(d.d, Scalar::Exact(q(0)));
        assert!(matches!(
            discriminant_data(Scalar::from(-4), q(0), q(0), Scalar::from(1), 5),
            Err(RepnError::Inconsistent { .. })
        ));
        // n = 7: thresholds 2 and 3.
        let cls = |d: Q| classify_sqrt_d(Scalar::Exact(d), 7);
        assert_eq!(cls(q(4)), (SqrtDClass::RealSmall, true));
        assert_eq!(cls(Q::new(25, 4)), (SqrtDClass::RealMid, true));
        assert_eq!(cls(q(5)), (SqrtDClass::RealMid, false));
        assert_eq!(cls(q(9)), (SqrtDClass::RealLarge, true));
        assert_eq!(cls(Q::new(1, 4)), (SqrtDClass::RealSmall, true));
        assert_eq!(classify_sqrt_d(Scalar::Real(2.25), 7), (SqrtDClass::RealSmall, true));
        assert_eq!(classify_sqrt_d(Scalar::Real(5.0), 7), (SqrtDClass::RealMid, false));
        assert_eq!(classify_sqrt_d(Scalar::Real(6.25), 7), (SqrtDClass::RealMid, true));
    }

    #[test]
    fn admissibility_and_sobolev_examples() {
        assert_eq!(admissibility_check(0.0, q(0)), (0.0, true));
        assert_eq!(admissibility_check(-1.0, q(2)), (3.0, true));
        assert_eq!(admissibility_check(5.0, q(2)), (-3.0, false));
        assert_eq!(sobolev_shift(1.7, 0.0, q(0), 0).unwrap(), 1.7);
        assert_eq!(sobolev_shift(1.0, -1.0, q(0), 2).unwrap(), 4.0);
        assert_eq!(sobolev_shift(3.0, 0.0, q(2), 1).unwrap(), 15.0);
        assert!(matches!(sobolev_shift(1.0, 3.0, q(0), 1), Err(RepnError::NonPositiveBase(_))));
    }

    #[test]
    fn principal_series_is_admissible_on_every_k_type() {
        for n in 3..=6 {
            for tau in enumerate_k_types(n, 40.0, WeightLattice::WithSpin) {
                let tc = casimir_k(&tau, n).unwrap();
                for eta in branch_k_to_m(&tau, n).unwrap() {
                    for s in [Scalar::from(0), Scalar::Real(0.7), Scalar::from(3)] {
                        let p = SeriesParam::Principal { s, eta: eta.clone() };
                        if p.validate(n).is_err() {
                            continue;
                        }
                        let mu = casimir_g_series(&p, n).unwrap().to_f64();
                        assert!(admissibility_check(mu, tc).1, "n={n} tau={tau:?} eta={eta:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_variants() {
        assert_eq!(truncation_orders(20, 5, 1.5, TruncationVariant::PlusMinus), (16, 14));
        assert_eq!(truncation_orders(20, 5, 2.0, TruncationVariant::PlusMinus), (16, 12));
        assert_eq!(truncation_orders(20, 5, 2.0, TruncationVariant::BothMinus), (12, 12));
    }

    #[test]
    fn datum_serializes_rationals() {
        let d = discriminant_data(Scalar::Exact(Q::new(-5, 2)), q(0), q(0), Scalar::Exact(Q::new(-1, 4)), 4).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["mu"]["num"], -5);
        assert_eq!(v["mu"]["den"], 2);
        assert_eq!(v["sqrt_d_class"], "imaginary");
    }

    proptest! {
        #[test]
        fn casimir_k_is_nonnegative(a in 0i64..12, b in 0i64..12, c in 0i64..12) {
            let mut v = [a, b, c];
            v.sort_unstable_by(|x, y| y.cmp(x));
            let w = HighestWeight::from_ints(&v, 7).unwrap();
            prop_assert!(casimir_k(&w, 7).unwrap() >= Q::zero());
        }

        #[test]
        fn sobolev_shift_is_multiplicative(mu in -5.0f64..0.5, t in 0i64..10, k in 0u32..5) {
            let one = sobolev_shift(1.0, mu, q(t), 1).unwrap();
            let kk = sobolev_shift(2.0, mu, q(t), k).unwrap();
            prop_assert!((kk - 2.0 * one.powi(k as i32)).abs() <= 1e-9 * kk.abs().max(1.0));
        }
    }
}
