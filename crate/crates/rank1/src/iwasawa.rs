//! Group-level Iwasawa factorization `g = k·a·n` in SO(n,1)° and
//! finite-difference realizations of the Casimir operator.
//!
//! With `ξ = e_0 + e_n` the null vector fixed by `N`, `a = exp(t·a1)` scales
//! `ξ` by `e^t` and `K = SO(n) ⊕ 1` fixes the last coordinate, so
//! `e^t = (gξ)_n`. The `N` coordinates follow from the Euclidean inner
//! products `(g e_i)·(g ξ)`, which do not see `k`.

use crate::lie_structure::{casimir_terms, form_j, inner_product, LieBasis, MatrixElement};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Errors from group-level routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IwasawaError {
    #[error("matrix is not in SO(n,1)°: {0}")]
    NotInGroup(String),
    #[error("factorization residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("direction is not in the {slot} subalgebra (residual {residual:e})")]
    WrongSubalgebra { slot: &'static str, residual: f64 },
    #[error("step h = {0} outside [1e-5, 1e-2]")]
    Step(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Default finite-difference base step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// An element of the identity component of SO(n,1).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    n: usize,
    entries: DMatrix<f64>,
}

impl GroupElement {
    /// Checks `gᵀJg = J`, `det g = 1`, `g_nn ≥ 1` and a positively oriented spatial block.
    pub fn new(n: usize, entries: DMatrix<f64>) -> Result<Self, IwasawaError> {
        if entries.nrows() != n + 1 || entries.ncols() != n + 1 {
            return Err(IwasawaError::NotInGroup(format!("shape {}x{}", entries.nrows(), entries.ncols())));
        }
        let j = form_j(n);
        let scale = entries.amax().max(1.0);
        let r = (entries.transpose() * &j * &entries - &j).amax();
        if r > 1e-9 * scale * scale {
            return Err(IwasawaError::NotInGroup(format!("|gᵀJg − J| = {r:e}")));
        }
        let det = entries.determinant();
        if (det - 1.0).abs() > 1e-9 * scale.powi(n as i32 + 1) {
            return Err(IwasawaError::NotInGroup(format!("det = {det}")));
        }
        if entries[(n, n)] < 1.0 - 1e-9 {
            return Err(IwasawaError::NotInGroup(format!("g_nn = {}", entries[(n, n)])));
        }
        if entries.view((0, 0), (n, n)).determinant() <= 0.0 {
            return Err(IwasawaError::NotInGroup("spatial block reverses orientation".into()));
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, entries: DMatrix::identity(n + 1, n + 1) }
    }

    /// `exp(X)` for `X` in so(n,1).
    pub fn exp(x: &MatrixElement) -> Self {
        Self { n: x.n(), entries: x.entries().clone().exp() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { n: self.n, entries: &self.entries * &other.entries }
    }
}

/// Iwasawa coordinates: `g = k · exp(t·a1) · exp(Σ uᵢ nᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaCoords {
    pub k: DMatrix<f64>,
    pub t: f64,
    pub u: Vec<f64>,
}

fn a_matrix(n: usize, t: f64) -> DMatrix<f64> {
    let mut a = DMatrix::identity(n + 1, n + 1);
    a[(0, 0)] = t.cosh();
    a[(n, n)] = t.cosh();
    a[(0, n)] = t.sinh();
    a[(n, 0)] = t.sinh();
    a
}

fn n_matrix(u: &[f64], basis: &LieBasis) -> DMatrix<f64> {
    let n = basis.n;
    let y = u.iter().zip(&basis.n_vecs).fold(DMatrix::zeros(n + 1, n + 1), |acc, (c, v)| acc + v.entries() * *c);
    // exp of a nilpotent element with Y³ = 0 in the vector representation.
    DMatrix::identity(n + 1, n + 1) + &y + &y * &y * 0.5
}

/// Rebuilds `k·a·n` from coordinates.
pub fn reconstruct(c: &IwasawaCoords, basis: &LieBasis) -> DMatrix<f64> {
    &c.k * a_matrix(basis.n, c.t) * n_matrix(&c.u, basis)
}

/// Factors `g = k a n`.
pub fn iwasawa_decompose(g: &GroupElement, basis: &LieBasis) -> Result<IwasawaCoords, IwasawaError> {
    let n = basis.n;
    if g.n != n {
        return Err(IwasawaError::DimensionMismatch(g.n, n));
    }
    let gm = &g.entries;
    let gxi = gm.column(0) + gm.column(n);
    let et = gxi[n];
    if et <= 0.0 {
        return Err(IwasawaError::NotInGroup(format!("(gξ)_n = {et}")));
    }
    let t = et.ln();
    // C[i][j] = (n_j e_i)·ξ / 2 for spatial i = 1..n−1.
    let r = n - 1;
    let mut cmat = DMatrix::zeros(r, r);
    for (j, nv) in basis.n_vecs.iter().enumerate() {
        for i in 0..r {
            let col = nv.entries().column(i + 1);
            cmat[(i, j)] = (col[0] + col[n]) / 2.0;
        }
    }
    let w = nalgebra::DVector::from_iterator(r, (0..r).map(|i| gm.column(i + 1).dot(&gxi) / (2.0 * et * et)));
    let u = cmat.lu().solve(&w).ok_or_else(|| IwasawaError::NotInGroup("singular N-coordinate system".into()))?;
    let an = a_matrix(n, t) * n_matrix(u.as_slice(), basis);
    let an_inv = form_j(n) * an.transpose() * form_j(n);
    let raw_k = gm * an_inv;
    // Orthogonality cleanup: nearest rotation of the spatial block, e_n fixed.
    let block = raw_k.view((0, 0), (n, n)).into_owned();
    let svd = block.svd(true, true);
    let rot = svd.u.unwrap() * svd.v_t.unwrap();
    let mut k = DMatrix::identity(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(&rot);
    let coords = IwasawaCoords { k, t, u: u.iter().copied().collect() };
    let res = (reconstruct(&coords, basis) - gm).norm();
    if res > 1e-8 * gm.norm().max(1.0) {
        return Err(IwasawaError::Residual(res));
    }
    Ok(coords)
}

/// `f(g) = Σ c·∏ g_{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub monomials: Vec<(f64, Vec<(usize, usize)>)>,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self { monomials: vec![(c, vec![])] }
    }

    pub fn entry(i: usize, j: usize) -> Self {
        Self { monomials: vec![(1.0, vec![(i, j)])] }
    }

    pub fn eval(&self, g: &DMatrix<f64>) -> f64 {
        self.monomials.iter().map(|(c, idx)| c * idx.iter().map(|&(i, j)| g[(i, j)]).product::<f64>()).sum()
    }

    /// Random sparse polynomial with 1–4 monomials of degree 1–3.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let count = rng.gen_range(1..=4);
        let monomials = (0..count)
            .map(|_| {
                let deg = rng.gen_range(1..=3);
                let idx = (0..deg).map(|_| (rng.gen_range(0..=n), rng.gen_range(0..=n))).collect();
                (rng.gen_range(-1.0..1.0), idx)
            })
            .collect();
        Self { monomials }
    }
}

/// Where the one-parameter subgroup is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Left,
    IwasawaK,
    IwasawaA,
    IwasawaN,
    Right,
}

/// A point prepared for repeated derivative evaluation.
#[derive(Debug, Clone)]
pub struct Point {
    pub g: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub nm: DMatrix<f64>,
    pub coords: IwasawaCoords,
}

impl Point {
    pub fn new(g: &GroupElement, basis: &LieBasis) -> Result<Self, IwasawaError> {
        let coords = iwasawa_decompose(g, basis)?;
        Ok(Self {
            g: g.entries.clone(),
            k: coords.k.clone(),
            a: a_matrix(basis.n, coords.t),
            nm: n_matrix(&coords.u, basis),
            coords,
        })
    }

    fn curve(&self, slot: Slot, e: &DMatrix<f64>) -> DMatrix<f64> {
        match slot {
            Slot::Left => e * &self.g,
            Slot::IwasawaK | Slot::IwasawaA => &self.k * e * &self.a * &self.nm,
            Slot::IwasawaN => &self.k * &self.a * e * &self.nm,
            Slot::Right => &self.g * e,
        }
    }
}

fn check_slot(x: &MatrixElement, slot: Slot, basis: &LieBasis) -> Result<(), IwasawaError> {
    let n = basis.n;
    let (name, residual) = match slot {
        Slot::Left | Slot::Right => return Ok(()),
        Slot::IwasawaK => {
            let e = x.entries();
            let mut r = (e + e.transpose()).amax();
            for i in 0..=n {
                r = r.max(e[(i, n)].abs()).max(e[(n, i)].abs());
            }
            ("k", r)
        }
        Slot::IwasawaA => ("a", x.lin(1.0, &basis.a1, -inner_product(x, &basis.a1)).entries().amax()),
        Slot::IwasawaN => {
            let proj = basis.n_vecs.iter().fold(x.clone(), |acc, v| acc.lin(1.0, v, -inner_product(x, v)));
            ("n", proj.entries().amax())
        }
    };
    if residual > 1e-10 * (1.0 + x.entries().amax()) {
        return Err(IwasawaError::WrongSubalgebra { slot: name, residual });
    }
    Ok(())
}

fn check_step(h: f64) -> Result<(), IwasawaError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(IwasawaError::Step(h));
    }
    Ok(())
}

fn expm(x: &MatrixElement, s: f64) -> DMatrix<f64> {
    (x.entries() * s).exp()
}

fn richardson(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Finite-difference derivative along `X` inserted at `slot`.
pub fn directional_derivative(
    f: &TestFunction,
    p: &Point,
    x: &MatrixElement,
    slot: Slot,
    order: u8,
    h: f64,
    basis: &LieBasis,
) -> Result<f64, IwasawaError> {
    check_step(h)?;
    check_slot(x, slot, basis)?;
    let val = |s: f64| f.eval(&p.curve(slot, &expm(x, s)));
    Ok(match order {
        1 => richardson(|h| (val(h) - val(-h)) / (2.0 * h), h),
        _ => {
            let f0 = val(0.0);
            richardson(|h| (val(h) - 2.0 * f0 + val(-h)) / (h * h), h)
        }
    })
}

/// Mixed derivative `𝔎_X 𝔑_Y f`, i.e. `∂s∂r f(k exp(sX) a exp(rY) n)`.
pub fn mixed_kn_derivative(
    f: &TestFunction,
    p: &Point,
    x: &MatrixElement,
    y: &MatrixElement,
    h: f64,
    basis: &LieBasis,
) -> Result<f64, IwasawaError> {
    check_step(h)?;
    check_slot(x, Slot::IwasawaK, basis)?;
    check_slot(y, Slot::IwasawaN, basis)?;
    let val = |s: f64, r: f64| f.eval(&(&p.k * expm(x, s) * &p.a * expm(y, r) * &p.nm));
    Ok(richardson(|h| (val(h, h) - val(h, -h) - val(-h, h) + val(-h, -h)) / (4.0 * h * h), h))
}

/// Mixed derivative along two Iwasawa slots in either order, for commutation checks.
pub fn mixed_slot_derivative(
    f: &TestFunction,
    p: &Point,
    (x, sx): (&MatrixElement, Slot),
    (y, sy): (&MatrixElement, Slot),
    h: f64,
    basis: &LieBasis,
) -> Result<f64, IwasawaError> {
    check_step(h)?;
    check_slot(x, sx, basis)?;
    check_slot(y, sy, basis)?;
    let ins =
        |slot: Slot, e: DMatrix<f64>, k: &mut DMatrix<f64>, a: &mut DMatrix<f64>, nm: &mut DMatrix<f64>| match slot {
            Slot::IwasawaK => *k = &*k * e,
            Slot::IwasawaA => *a = e * &*a,
            Slot::IwasawaN => *nm = e * &*nm,
            _ => {}
        };
    let val = |s: f64, r: f64| {
        let (mut k, mut a, mut nm) = (p.k.clone(), p.a.clone(), p.nm.clone());
        ins(sy, expm(y, r), &mut k, &mut a, &mut nm);
        ins(sx, expm(x, s), &mut k, &mut a, &mut nm);
        f.eval(&(k * a * nm))
    };
    Ok(richardson(|h| (val(h, h) - val(h, -h) - val(-h, h) + val(-h, -h)) / (4.0 * h * h), h))
}

fn casimir_slot(f: &TestFunction, p: &Point, basis: &LieBasis, h: f64, slot: Slot) -> Result<f64, IwasawaError> {
    casimir_terms(basis).iter().map(|(s, x)| directional_derivative(f, p, x, slot, 2, h, basis).map(|d| s * d)).sum()
}

/// `Σ sign · d²/ds² f(exp(sX)g)`.
pub fn apply_casimir_left(f: &TestFunction, p: &Point, basis: &LieBasis, h: f64) -> Result<f64, IwasawaError> {
    casimir_slot(f, p, basis, h, Slot::Left)
}

/// `Σ sign · d²/ds² f(g exp(sX))`.
pub fn apply_casimir_right(f: &TestFunction, p: &Point, basis: &LieBasis, h: f64) -> Result<f64, IwasawaError> {
    casimir_slot(f, p, basis, h, Slot::Right)
}

/// Exponent placed on the mixed `𝔎𝔑` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CasimirVariant {
    /// `e^{−t}` on the mixed term.
    MixedExpT,
    /// `e^{−2t}` on the mixed term.
    MixedExp2T,
}

impl CasimirVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::MixedExpT => "mixed_exp_t",
            Self::MixedExp2T => "mixed_exp_2t",
        }
    }
}

/// Right-hand side of the Casimir derivative formula in Iwasawa coordinates.
pub fn apply_casimir_iwasawa_rhs(
    f: &TestFunction,
    p: &Point,
    basis: &LieBasis,
    h: f64,
    variant: CasimirVariant,
) -> Result<f64, IwasawaError> {
    let t = p.coords.t;
    let rho = (basis.n as f64 - 1.0) / 2.0;
    let a2 = directional_derivative(f, p, &basis.a1, Slot::IwasawaA, 2, h, basis)?;
    let a1 = directional_derivative(f, p, &basis.a1, Slot::IwasawaA, 1, h, basis)?;
    let mixed_weight = match variant {
        CasimirVariant::MixedExpT => (-t).exp(),
        CasimirVariant::MixedExp2T => (-2.0 * t).exp(),
    };
    let mut root_part = 0.0;
    for (kv, nv) in basis.k_vecs.iter().zip(&basis.n_vecs) {
        let kn = mixed_kn_derivative(f, p, kv, nv, h, basis)?;
        let nn = directional_derivative(f, p, nv, Slot::IwasawaN, 2, h, basis)?;
        root_part += -2.0 * std::f64::consts::SQRT_2 * mixed_weight * kn + 2.0 * (-2.0 * t).exp() * nn;
    }
    let mut omega_m = 0.0;
    for m in &basis.m_vecs {
        omega_m -= directional_derivative(f, p, m, Slot::IwasawaK, 2, h, basis)?;
    }
    Ok(a2 + 2.0 * rho * a1 + root_part + omega_m)
}

/// Random group element: product of two exponentials of random algebra elements.
pub fn random_group_element(basis: &LieBasis, scale: f64, rng: &mut impl Rng) -> GroupElement {
    let n = basis.n;
    let mut g = GroupElement::identity(n);
    for _ in 0..2 {
        let x = basis
            .elements()
            .iter()
            .fold(MatrixElement::zero(n), |acc, e| acc.lin(1.0, e, rng.gen_range(-scale..scale)));
        g = g.mul(&GroupElement::exp(&x));
    }
    g
}

/// Error statistics of one variant.
#[derive(Debug, Clone, Serialize)]
pub struct VariantStats {
    pub variant: CasimirVariant,
    pub trials: usize,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    /// Whether `max_rel_err` is within [`CASIMIR_TOL`].
    pub matches: bool,
}

/// Outcome of [`verify_casimir_formula`].
#[derive(Debug, Clone, Serialize)]
pub struct CasimirReport {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub variants: Vec<VariantStats>,
    /// Variant with the smaller maximal error, or `"none"` when no trials ran.
    pub winner: String,
}

/// Relative tolerance `|L − RHS|/(1+|L|)`.
pub const CASIMIR_TOL: f64 = 1e-4;

/// Compares the left Casimir action with both Iwasawa forms on random `(f, g)`.
pub fn verify_casimir_formula(
    trials: usize,
    n: usize,
    seed: u64,
) -> Result<CasimirReport, crate::lie_structure::LieError> {
    let basis = crate::lie_structure::build_so_n1_basis(n)?;
    let variants = [CasimirVariant::MixedExpT, CasimirVariant::MixedExp2T];
    let errs: Vec<[f64; 2]> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let g = random_group_element(&basis, 0.4, &mut rng);
            let f = TestFunction::random(n, &mut rng);
            let p = Point::new(&g, &basis).expect("random element factors");
            let l = apply_casimir_left(&f, &p, &basis, DEFAULT_STEP).expect("valid step");
            variants.map(|v| {
                let r = apply_casimir_iwasawa_rhs(&f, &p, &basis, DEFAULT_STEP, v).expect("valid step");
                (l - r).abs() / (1.0 + l.abs())
            })
        })
        .collect();
    if trials == 0 {
        return Ok(CasimirReport { n, seed, trials, variants: vec![], winner: "none".into() });
    }
    let stats: Vec<VariantStats> = variants
        .iter()
        .enumerate()
        .map(|(k, &variant)| {
            let max = errs.iter().map(|e| e[k]).fold(0.0, f64::max);
            let mean = errs.iter().map(|e| e[k]).sum::<f64>() / trials as f64;
            VariantStats { variant, trials, max_rel_err: max, mean_rel_err: mean, matches: max <= CASIMIR_TOL }
        })
        .collect();
    let winner = if stats[0].max_rel_err <= stats[1].max_rel_err { stats[0].variant } else { stats[1].variant };
    Ok(CasimirReport { n, seed, trials, variants: stats, winner: winner.name().into() })
}
