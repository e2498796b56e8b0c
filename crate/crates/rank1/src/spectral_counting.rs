//! Weyl dimensions, enumeration of `K`-types below a Casimir threshold, the
//! branching counting function `S(W)` with a log–log growth fit, and
//! dyadic-shell partial sums on synthetic spectra.

use crate::repn_catalog::{casimir_k, rho_vector, ser_q, HighestWeight, RepnError};
use crate::Q;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Errors from counting routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error(transparent)]
    Repn(#[from] RepnError),
    #[error("Weyl product {0} is not an integer")]
    NonIntegralDimension(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("spectrum entry {index}: 1 − μ + 2ϖ = {base} is not positive")]
    Positivity { index: usize, base: f64 },
    #[error("shells must be ≥ 1")]
    Shells,
    #[error("count overflowed u64")]
    Overflow,
}

/// Positive roots of `SO(m)` as coefficient pairs over the ε-basis.
fn positive_roots(m: usize) -> Vec<Vec<(usize, i64)>> {
    let p = m / 2;
    let mut roots = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            roots.push(vec![(i, 1), (j, -1)]);
            roots.push(vec![(i, 1), (j, 1)]);
        }
        if m % 2 == 1 {
            roots.push(vec![(i, 1)]);
        }
    }
    roots
}

/// `∏_{α>0} ⟨Λ+ρ,α⟩/⟨ρ,α⟩`.
pub fn weyl_dimension(lambda: &HighestWeight) -> Result<u64, CountError> {
    let m = lambda.group();
    if m == 2 {
        return Ok(1);
    }
    let rho = rho_vector(m);
    let pair = |v: &[Q], root: &[(usize, i64)]| root.iter().map(|&(i, c)| v[i] * c).sum::<Q>();
    let shifted: Vec<Q> = lambda.coords().iter().zip(&rho).map(|(l, r)| l + r).collect();
    let mut prod = Q::one();
    for root in positive_roots(m) {
        prod *= pair(&shifted, &root) / pair(&rho, &root);
    }
    if !prod.is_integer() {
        return Err(CountError::NonIntegralDimension(prod.to_string()));
    }
    prod.to_integer().to_u64().ok_or_else(|| CountError::NonIntegralDimension(prod.to_string()))
}

/// Which weight lattice to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLattice {
    /// Integral weights only (representations of `SO(m)`).
    Integral,
    /// Integral and half-odd weights (representations of `Spin(m)`).
    WithSpin,
}

struct Search {
    m: usize,
    p: usize,
    w: Q,
    offset: Q,
}

impl Search {
    // Term i of τ(Ω_K) is Λ_i(Λ_i + m − 2i) ≥ 0, so partial sums prune the search.
    fn term(&self, i: usize, v: Q) -> Q {
        v * (v + Q::from_integer(self.m as i64 - 2 * (i as i64 + 1)))
    }

    fn rec(&self, cur: &mut Vec<Q>, acc: Q, out: &mut Vec<Vec<Q>>) {
        let i = cur.len();
        if i == self.p {
            out.push(cur.clone());
            return;
        }
        let last_even = self.m.is_multiple_of(2) && i + 1 == self.p;
        let mut v = self.offset;
        loop {
            if i > 0 && v > cur[i - 1] {
                break;
            }
            let t = self.term(i, v);
            if acc + t > self.w {
                break;
            }
            cur.push(v);
            self.rec(cur, acc + t, out);
            cur.pop();
            if last_even && !v.is_zero() {
                cur.push(-v);
                self.rec(cur, acc + t, out);
                cur.pop();
            }
            v += 1;
        }
    }
}

fn enumerate_offset(m: usize, w: Q, offset: Q) -> Vec<HighestWeight> {
    let search = Search { m, p: m / 2, w, offset };
    let mut out = Vec::new();
    search.rec(&mut Vec::with_capacity(search.p), Q::zero(), &mut out);
    out.into_iter().map(|c| HighestWeight::new(c, m).expect("dominant by construction")).collect()
}

/// All dominant weights of `SO(n)` with `τ(Ω_K) ≤ W`, lexicographically ascending.
pub fn enumerate_k_types(n: usize, w: f64, lattice: WeightLattice) -> Vec<HighestWeight> {
    if w < 0.0 || !w.is_finite() || n < 2 {
        return Vec::new();
    }
    // Casimir values are in (1/4)ℤ; flooring to that grid keeps comparisons exact.
    let wq = Q::new((w * 4.0 + 1e-9).floor() as i64, 4);
    let mut out = enumerate_offset(n, wq, Q::zero());
    if lattice == WeightLattice::WithSpin {
        out.extend(enumerate_offset(n, wq, Q::new(1, 2)));
    }
    out.sort();
    out
}

/// Result of [`branching_count_s`].
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub mult_bound: u64,
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    /// Least-squares slope of `log S` against `log W` over points with `S ≥ 10`.
    pub fitted_exponent: Option<f64>,
    pub fit_points: usize,
    #[serde(serialize_with = "ser_q")]
    pub target_exponent: Q,
}

impl CountReport {
    /// `|fitted − target| / target`.
    pub fn relative_error(&self) -> Option<f64> {
        let t = self.target_exponent.to_f64()?;
        self.fitted_exponent.map(|f| (f - t).abs() / t)
    }
}

/// `(|R_K⁺| + r_K)/2` for `K = SO(n)`.
pub fn target_exponent(n: usize) -> Q {
    let p = (n / 2) as i64;
    let roots = if n % 2 == 1 { p * p } else { p * (p - 1) };
    Q::new(roots + p, 2)
}

/// Ordinary least-squares slope.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let k = xs.len();
    if k < 2 || ys.len() != k {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-spaced grid of `points` thresholds on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp()).collect()
}

/// `S(W) = Σ_{τ(Ω_K) ≤ W} m·d_τ` over integral `K`-types, with a growth-exponent fit.
pub fn branching_count_s(n: usize, grid: &[f64], mult_bound: u64) -> Result<CountReport, CountError> {
    if grid.len() < 4 {
        return Err(CountError::DegenerateGrid(format!("{} points, need ≥ 4", grid.len())));
    }
    if grid.iter().any(|w| !(w.is_finite() && *w > 0.0)) || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(CountError::DegenerateGrid("thresholds must be positive and increasing".into()));
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(CountError::DegenerateGrid(format!("span {lo}..{hi} is under two decades")));
    }
    let types = enumerate_k_types(n, hi, WeightLattice::Integral);
    let mut weighted: Vec<(f64, u64)> = types
        .par_iter()
        .map(|t| -> Result<(f64, u64), CountError> {
            let c = casimir_k(t, n)?.to_f64().unwrap_or(f64::NAN);
            Ok((c, weyl_dimension(t)?))
        })
        .collect::<Result<_, _>>()?;
    weighted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut counts = Vec::with_capacity(grid.len());
    let (mut idx, mut acc) = (0usize, 0u64);
    for &w in grid {
        while idx < weighted.len() && weighted[idx].0 <= w + 1e-9 {
            let add = weighted[idx].1.checked_mul(mult_bound).ok_or(CountError::Overflow)?;
            acc = acc.checked_add(add).ok_or(CountError::Overflow)?;
            idx += 1;
        }
        counts.push(acc);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        grid.iter().zip(&counts).filter(|(_, s)| **s >= 10).map(|(w, s)| (w.ln(), (*s as f64).ln())).unzip();
    Ok(CountReport {
        n,
        mult_bound,
        thresholds: grid.to_vec(),
        fit_points: xs.len(),
        fitted_exponent: ols_slope(&xs, &ys),
        counts,
        target_exponent: target_exponent(n),
    })
}

/// One entry of a synthetic spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub mu: f64,
    #[serde(serialize_with = "ser_q")]
    pub varpi: Q,
    pub multiplicity: u64,
}

impl SpectrumEntry {
    /// `1 − μ + 2ϖ`.
    pub fn base(&self) -> f64 {
        1.0 - self.mu + 2.0 * self.varpi.to_f64().unwrap_or(f64::NAN)
    }
}

/// A finite list of `(μ, ϖ, multiplicity)` triples.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SyntheticSpectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl SyntheticSpectrum {
    /// Checks `1 − μ + 2ϖ > 0` for every entry.
    pub fn validate(&self) -> Result<(), CountError> {
        for (index, e) in self.entries.iter().enumerate() {
            let base = e.base();
            if base.is_nan() || base <= 0.0 {
                return Err(CountError::Positivity { index, base });
            }
        }
        Ok(())
    }

    /// Bases `2^j` for `j < shells` with multiplicity `⌈2^{jα}⌉`.
    pub fn planted(alpha: f64, shells: u32) -> Self {
        let entries = (0..shells)
            .map(|j| SpectrumEntry {
                mu: 1.0 - 2f64.powi(j as i32),
                varpi: Q::zero(),
                multiplicity: 2f64.powf(j as f64 * alpha).ceil().min(u64::MAX as f64) as u64,
            })
            .collect();
        Self { entries }
    }
}

/// Cumulative sums of `mult·(1−μ+2ϖ)^s` over dyadic shells `2^j ≤ base < 2^{j+1}`;
/// shell 0 also holds bases in `(0, 1)`.
pub fn summability_partial_sums(
    spec: &SyntheticSpectrum,
    s_exponent: f64,
    shells: usize,
) -> Result<Vec<f64>, CountError> {
    if shells == 0 {
        return Err(CountError::Shells);
    }
    spec.validate()?;
    let mut per_shell = vec![0.0; shells];
    for e in &spec.entries {
        let base = e.base();
        let j = if base < 2.0 { 0 } else { base.log2().floor() as usize };
        if j < shells {
            per_shell[j] += e.multiplicity as f64 * base.powf(s_exponent);
        }
    }
    Ok(per_shell
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect())
}

/// Ratio-test verdict on the last two shell contributions.
#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub s_exponent: f64,
    pub partial_sums: Vec<f64>,
    pub last_ratio: Option<f64>,
    pub converges: bool,
}

/// Partial sums plus the ratio of the last two shell contributions.
pub fn summability_report(
    spec: &SyntheticSpectrum,
    s_exponent: f64,
    shells: usize,
) -> Result<SummabilityReport, CountError> {
    let partial_sums = summability_partial_sums(spec, s_exponent, shells)?;
    let contrib: Vec<f64> =
        partial_sums.iter().enumerate().map(|(i, s)| if i == 0 { *s } else { s - partial_sums[i - 1] }).collect();
    let k = contrib.len();
    let last_ratio = (k >= 2 && contrib[k - 2] > 0.0).then(|| contrib[k - 1] / contrib[k - 2]);
    Ok(SummabilityReport { s_exponent, converges: last_ratio.is_some_and(|r| r < 1.0), last_ratio, partial_sums })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hw(v: &[i64], m: usize) -> HighestWeight {
        HighestWeight::from_ints(v, m).unwrap()
    }

    #[test]
    fn weyl_examples() {
        for l in 0..6 {
            assert_eq!(weyl_dimension(&hw(&[l], 3)).unwrap(), 2 * l as u64 + 1);
        }
        assert_eq!(weyl_dimension(&hw(&[1, 0], 5)).unwrap(), 5);
        assert_eq!(weyl_dimension(&hw(&[1, 1], 5)).unwrap(), 10);
        assert_eq!(weyl_dimension(&HighestWeight::from_halves(&[1, 1], 5).unwrap()).unwrap(), 4);
        assert_eq!(weyl_dimension(&hw(&[1, 0], 4)).unwrap(), 4);
        assert_eq!(weyl_dimension(&hw(&[1, 1], 4)).unwrap(), 3);
        assert_eq!(weyl_dimension(&hw(&[1, 0, 0], 6)).unwrap(), 6);
        assert_eq!(weyl_dimension(&hw(&[1, 1, 0], 6)).unwrap(), 15);
        assert_eq!(weyl_dimension(&hw(&[1, 0, 0], 7)).unwrap(), 7);
        assert_eq!(weyl_dimension(&hw(&[4], 2)).unwrap(), 1);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_k_types(5, 0.0, WeightLattice::WithSpin), vec![HighestWeight::trivial(5)]);
        assert_eq!(enumerate_k_types(3, 6.0, WeightLattice::Integral), vec![hw(&[0], 3), hw(&[1], 3), hw(&[2], 3)]);
        let so4 = enumerate_k_types(4, 3.0, WeightLattice::WithSpin);
        let want = vec![
            hw(&[0, 0], 4),
            HighestWeight::from_halves(&[1, -1], 4).unwrap(),
            HighestWeight::from_halves(&[1, 1], 4).unwrap(),
            hw(&[1, 0], 4),
        ];
        assert_eq!(so4, want);
    }

    /// Box scan independent of the pruned recursion.
    fn brute(n: usize, w: f64, lattice: WeightLattice) -> Vec<HighestWeight> {
        let p = n / 2;
        let bound = (w.sqrt() + n as f64).ceil() as i64;
        let mut out = Vec::new();
        let side = 4 * bound + 1;
        for code in 0..side.pow(p as u32) {
            let mut c = code;
            let twice: Vec<i64> = (0..p)
                .map(|_| {
                    let v = c % side - 2 * bound;
                    c /= side;
                    v
                })
                .collect();
            if lattice == WeightLattice::Integral && twice.iter().any(|x| x % 2 != 0) {
                continue;
            }
            if let Ok(hw) = HighestWeight::from_halves(&twice, n) {
                if casimir_k(&hw, n).unwrap().to_f64().unwrap() <= w {
                    out.push(hw);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn enumeration_matches_box_scan_and_has_no_leaks() {
        for n in 3..=7 {
            for w in [0.0, 1.5, 7.0, 20.0] {
                for lat in [WeightLattice::Integral, WeightLattice::WithSpin] {
                    let e = enumerate_k_types(n, w, lat);
                    assert_eq!(e, brute(n, w, lat), "n={n} w={w}");
                    let bigger = enumerate_k_types(n, w + 1.0, lat);
                    let below: Vec<_> =
                        bigger.into_iter().filter(|t| casimir_k(t, n).unwrap().to_f64().unwrap() <= w).collect();
                    assert_eq!(below, e);
                }
            }
        }
    }

    #[test]
    fn counting_examples() {
        let grid = log_grid(1e2, 1e4, 13);
        let r = branching_count_s(3, &grid, 0).unwrap();
        assert!(r.counts.iter().all(|c| *c == 0));
        assert!(r.fitted_exponent.is_none());
        let r = branching_count_s(3, &grid, 1).unwrap();
        assert_eq!(r.target_exponent, Q::from_integer(1));
        // Direct summation oracle.
        for (w, s) in grid.iter().zip(&r.counts) {
            let direct: u64 = (0..).take_while(|l: &u64| (l * (l + 1)) as f64 <= *w).map(|l| 2 * l + 1).sum();
            assert_eq!(*s, direct);
        }
        let f = r.fitted_exponent.unwrap();
        assert!((0.9..=1.1).contains(&f), "{f}");
        let r = branching_count_s(5, &grid, 1).unwrap();
        assert_eq!(r.target_exponent, Q::from_integer(3));
        assert!(r.relative_error().unwrap() <= 0.1, "{r:?}");
        assert!(r.counts.windows(2).all(|p| p[0] <= p[1]));
        assert!(matches!(branching_count_s(3, &[10.0, 20.0, 30.0, 40.0], 1), Err(CountError::DegenerateGrid(_))));
        assert!(matches!(branching_count_s(3, &[1e2, 1e4], 1), Err(CountError::DegenerateGrid(_))));
    }

    #[test]
    fn target_exponents() {
        assert_eq!(target_exponent(4), Q::from_integer(2));
        assert_eq!(target_exponent(6), Q::new(9, 2));
        assert_eq!(target_exponent(7), Q::from_integer(6));
    }

    #[test]
    fn summability_examples() {
        let empty = SyntheticSpectrum::default();
        assert_eq!(summability_partial_sums(&empty, -2.0, 5).unwrap(), vec![0.0; 5]);
        let spec = SyntheticSpectrum::planted(2.0, 24);
        let conv = summability_report(&spec, -3.0, 24).unwrap();
        assert!(conv.converges);
        assert!((conv.last_ratio.unwrap() - 0.5).abs() < 1e-9);
        assert!(conv.partial_sums.last().unwrap() <= &2.0);
        let div = summability_report(&spec, -1.5, 24).unwrap();
        assert!(!div.converges);
        assert!((div.last_ratio.unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!(div.partial_sums.last().unwrap() > &1000.0);
        for r in [&conv, &div] {
            assert!(r.partial_sums.windows(2).all(|p| p[0] <= p[1]));
        }
        let bad = SyntheticSpectrum { entries: vec![SpectrumEntry { mu: 2.0, varpi: Q::zero(), multiplicity: 1 }] };
        assert!(matches!(summability_partial_sums(&bad, -1.0, 3), Err(CountError::Positivity { .. })));
        assert!(matches!(summability_partial_sums(&empty, -1.0, 0), Err(CountError::Shells)));
    }

    proptest! {
        #[test]
        fn summability_threshold(alpha in 0.5f64..3.0, gap in 0.2f64..1.5) {
            let spec = SyntheticSpectrum::planted(alpha, 18);
            prop_assert!(summability_report(&spec, -alpha - gap, 18).unwrap().converges);
            prop_assert!(!summability_report(&spec, -alpha + gap, 18).unwrap().converges);
        }

        #[test]
        fn counts_are_monotone(n in 3usize..7, lo in 1.0f64..5.0) {
            let grid = log_grid(lo, lo * 150.0, 6);
            let r = branching_count_s(n, &grid, 2).unwrap();
            prop_assert!(r.counts.windows(2).all(|p| p[0] <= p[1]));
        }
    }
}
