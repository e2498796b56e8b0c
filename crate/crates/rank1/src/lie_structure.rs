//! The real Lie algebra so(n,1) realized as (n+1)×(n+1) matrices.
//!
//! The defining form is `J = diag(1, …, 1, −1)` and the algebra is
//! `{X : XᵀJ + JX = 0}`. Indices are zero-based: the boost `a1` mixes
//! coordinate `0` with coordinate `n`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Errors raised while building or combining algebra elements.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("n = {0} is out of range; need 3 <= n <= 12")]
    RankOutOfRange(usize),
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape { rows: usize, cols: usize, expected: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not in so(n,1): max |XᵀJ + JX| = {0:e}")]
    NotInAlgebra(f64),
    #[error("eigenspace of ad(a1) for eigenvalue 1 has dimension {found}, expected {expected}")]
    Eigenspace { found: usize, expected: usize },
}

/// Tolerance for the defining relation and the trace.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// An element of so(n,1).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElement {
    n: usize,
    entries: DMatrix<f64>,
}

impl MatrixElement {
    /// Wraps a matrix after checking the defining relation of so(n,1).
    pub fn new(n: usize, entries: DMatrix<f64>) -> Result<Self, LieError> {
        let x = Self::new_unchecked(n, entries)?;
        let r = x.algebra_residual();
        let scale = 1.0 + x.entries.amax();
        if r > ALGEBRA_TOL * scale || x.entries.trace().abs() > ALGEBRA_TOL * scale {
            return Err(LieError::NotInAlgebra(r));
        }
        Ok(x)
    }

    /// Wraps a matrix, checking only its shape.
    pub fn new_unchecked(n: usize, entries: DMatrix<f64>) -> Result<Self, LieError> {
        if entries.nrows() != n + 1 || entries.ncols() != n + 1 {
            return Err(LieError::Shape { rows: entries.nrows(), cols: entries.ncols(), expected: n + 1 });
        }
        Ok(Self { n, entries })
    }

    /// The zero element.
    pub fn zero(n: usize) -> Self {
        Self { n, entries: DMatrix::zeros(n + 1, n + 1) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Max entry of `XᵀJ + JX`.
    pub fn algebra_residual(&self) -> f64 {
        let j = form_j(self.n);
        (self.entries.transpose() * &j + &j * &self.entries).amax()
    }

    /// Linear combination `a·self + b·other`.
    pub fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        Self { n: self.n, entries: &self.entries * a + &other.entries * b }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { n: self.n, entries: &self.entries * a }
    }

    /// Frobenius norm of the underlying matrix.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// `J = diag(1, …, 1, −1)` of size n+1.
pub fn form_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    j[(n, n)] = -1.0;
    j
}

fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(i, j)] = 1.0;
    m
}

/// Iwasawa-adapted orthonormal basis of so(n,1).
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub n: usize,
    pub a1: MatrixElement,
    pub n_vecs: Vec<MatrixElement>,
    pub theta_n_vecs: Vec<MatrixElement>,
    pub k_vecs: Vec<MatrixElement>,
    pub p_vecs: Vec<MatrixElement>,
    pub m_vecs: Vec<MatrixElement>,
    /// Signs aligned with [`LieBasis::elements`].
    pub casimir_signs: Vec<f64>,
}

impl LieBasis {
    /// Concatenated basis `a1, k_1.., p_1.., m_1..`.
    pub fn elements(&self) -> Vec<&MatrixElement> {
        std::iter::once(&self.a1)
            .chain(self.k_vecs.iter())
            .chain(self.p_vecs.iter())
            .chain(self.m_vecs.iter())
            .collect()
    }

    /// dim so(n,1) = n(n+1)/2.
    pub fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Coordinates of `x` in the concatenated orthonormal basis.
    pub fn coordinates(&self, x: &MatrixElement) -> DVector<f64> {
        let els = self.elements();
        DVector::from_iterator(els.len(), els.iter().map(|e| inner_product(x, e)))
    }

    /// Matrix of `ad_X` in the concatenated basis.
    pub fn ad_matrix(&self, x: &MatrixElement) -> DMatrix<f64> {
        let els = self.elements();
        let d = els.len();
        let mut ad = DMatrix::zeros(d, d);
        for (j, ej) in els.iter().enumerate() {
            let c = bracket_unchecked(x, ej);
            for (i, ei) in els.iter().enumerate() {
                ad[(i, j)] = inner_product(&c, ei);
            }
        }
        ad
    }
}

/// Standard orthonormal basis of so(n,1): rotations `E_ij − E_ji` (i<j<n) then boosts `E_in + E_ni`.
pub fn standard_basis(n: usize) -> Vec<MatrixElement> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(MatrixElement { n, entries: unit(n, i, j) - unit(n, j, i) });
        }
    }
    for i in 0..n {
        out.push(MatrixElement { n, entries: unit(n, i, n) + unit(n, n, i) });
    }
    out
}

/// Builds the Iwasawa-adapted basis.
///
/// `n_vecs` span the +1 eigenspace of `ad(a1)`; they are obtained from a
/// symmetric eigendecomposition of `ad(a1)` in the standard basis, then the
/// seeds `E_0j − E_j0` are projected onto that eigenspace and Gram–Schmidt
/// orthonormalized so the output is deterministic.
pub fn build_so_n1_basis(n: usize) -> Result<LieBasis, LieError> {
    if !(3..=12).contains(&n) {
        return Err(LieError::RankOutOfRange(n));
    }
    let a1 = MatrixElement { n, entries: unit(n, 0, n) + unit(n, n, 0) };
    let std = standard_basis(n);
    let d = std.len();
    let mut ad = DMatrix::zeros(d, d);
    for (j, ej) in std.iter().enumerate() {
        let c = bracket_unchecked(&a1, ej);
        for (i, ei) in std.iter().enumerate() {
            ad[(i, j)] = inner_product(&c, ei);
        }
    }
    // ad(a1) is self-adjoint for this inner product since a1 lies in p.
    let eig = SymmetricEigen::new(ad);
    let cols: Vec<DVector<f64>> = (0..d)
        .filter(|&k| (eig.eigenvalues[k] - 1.0).abs() < 1e-9)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    if cols.len() != n - 1 {
        return Err(LieError::Eigenspace { found: cols.len(), expected: n - 1 });
    }
    let to_matrix = |v: &DVector<f64>| -> DMatrix<f64> {
        std.iter().zip(v.iter()).fold(DMatrix::zeros(n + 1, n + 1), |acc, (e, c)| acc + &e.entries * *c)
    };
    let mut n_vecs: Vec<MatrixElement> = Vec::with_capacity(n - 1);
    for j in 1..n {
        let seed = MatrixElement { n, entries: unit(n, 0, j) - unit(n, j, 0) };
        let proj = cols.iter().fold(DVector::zeros(d), |acc, c| {
            let coef: f64 = std.iter().zip(c.iter()).map(|(e, ci)| ci * inner_product(&seed, e)).sum();
            acc + c * coef
        });
        let mut v = MatrixElement { n, entries: to_matrix(&proj) };
        for u in &n_vecs {
            let c = inner_product(&v, u);
            v = v.lin(1.0, u, -c);
        }
        let nv = inner_product(&v, &v).sqrt();
        n_vecs.push(v.scale(1.0 / nv));
    }
    let theta_n_vecs: Vec<_> = n_vecs.iter().map(cartan_involution).collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k_vecs: Vec<_> = n_vecs.iter().zip(&theta_n_vecs).map(|(x, t)| x.lin(s, t, s)).collect();
    let p_vecs: Vec<_> = n_vecs.iter().zip(&theta_n_vecs).map(|(x, t)| x.lin(s, t, -s)).collect();
    let mut m_vecs = Vec::new();
    for i in 1..n {
        for j in (i + 1)..n {
            m_vecs.push(MatrixElement { n, entries: unit(n, i, j) - unit(n, j, i) });
        }
    }
    let mut casimir_signs = vec![1.0];
    casimir_signs.extend(std::iter::repeat_n(-1.0, k_vecs.len()));
    casimir_signs.extend(std::iter::repeat_n(1.0, p_vecs.len()));
    casimir_signs.extend(std::iter::repeat_n(-1.0, m_vecs.len()));
    Ok(LieBasis { n, a1, n_vecs, theta_n_vecs, k_vecs, p_vecs, m_vecs, casimir_signs })
}

fn bracket_unchecked(x: &MatrixElement, y: &MatrixElement) -> MatrixElement {
    MatrixElement { n: x.n, entries: &x.entries * &y.entries - &y.entries * &x.entries }
}

/// Matrix commutator `XY − YX`.
pub fn bracket(x: &MatrixElement, y: &MatrixElement) -> Result<MatrixElement, LieError> {
    if x.n != y.n {
        return Err(LieError::DimensionMismatch(x.n, y.n));
    }
    Ok(bracket_unchecked(x, y))
}

/// Killing form `Tr(ad_X ad_Y)` computed from adjoint matrices on `basis`.
pub fn killing_form(x: &MatrixElement, y: &MatrixElement, basis: &LieBasis) -> Result<f64, LieError> {
    if x.n != y.n {
        return Err(LieError::DimensionMismatch(x.n, y.n));
    }
    if x.n != basis.n {
        return Err(LieError::DimensionMismatch(x.n, basis.n));
    }
    Ok((basis.ad_matrix(x) * basis.ad_matrix(y)).trace())
}

/// `(n−1)·Tr(XY)`, the closed form of the Killing form on so(n,1).
pub fn killing_trace_form(x: &MatrixElement, y: &MatrixElement) -> f64 {
    (x.n as f64 - 1.0) * (&x.entries * &y.entries).trace()
}

/// Positive definite inner product `Tr(X Yᵀ)/2 = −B(X, θY)/(2(n−1))`.
pub fn inner_product(x: &MatrixElement, y: &MatrixElement) -> f64 {
    x.entries.dot(&y.entries) / 2.0
}

/// Cartan involution `θX = −Xᵀ`.
pub fn cartan_involution(x: &MatrixElement) -> MatrixElement {
    MatrixElement { n: x.n, entries: -x.entries.transpose() }
}

/// Signed terms of the Casimir element: `−1` on compact directions, `+1` on `a1` and `p`.
pub fn casimir_terms(basis: &LieBasis) -> Vec<(f64, MatrixElement)> {
    basis.casimir_signs.iter().copied().zip(basis.elements().into_iter().cloned()).collect()
}

/// `Σ sign · ad(X)²` as a matrix on so(n,1).
pub fn casimir_ad_operator(terms: &[(f64, MatrixElement)], basis: &LieBasis) -> DMatrix<f64> {
    let d = basis.dim();
    terms.iter().fold(DMatrix::zeros(d, d), |acc, (s, x)| {
        let a = basis.ad_matrix(x);
        acc + (&a * &a) * *s
    })
}
