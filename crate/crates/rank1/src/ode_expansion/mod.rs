//! Exponential-polynomial algebra, the rank-one ODE, its integral operators and
//! the iterated expansion of its solution.

pub mod coefficients;
pub mod expansion;
pub mod exppoly;
pub mod operators;
pub mod quadrature;
pub mod solve;

pub use coefficients::{collect_coefficients, filter_coefficients, rebuild_exp_poly, Branch, CoeffKey};
pub use expansion::{
    chain_degrees, delta_count, expand_iterated, expand_iterated_parts, expected_chain_degrees, pure_finite_chain,
    ChainDegrees, ExpansionParts, ExpansionReport, GeometricTheta, SwitchTable, ThetaProvider,
};
pub use exppoly::{ExpPoly, ExpPolyTerm};
pub use operators::{apply_difference, apply_j, apply_j_critical, integrate_monomial, MonomialIntegral, Sign, Variant};
pub use solve::{
    max_abs_difference, ode_residual, residual_scale, solve_ode_explicit, solve_ode_explicit_branch, solve_ode_numeric,
    SolveBranch,
};

use crate::repn_catalog::{classify_sqrt_d, ser_q, Scalar, SqrtDClass};
use crate::{C64, Q};
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

/// `|D|` below this is snapped to zero.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("integral diverges for exponent {sigma} (term {term:?})")]
    Divergence { sigma: C64, term: Option<usize> },
    #[error("power {p} exceeds the supported maximum")]
    PowerTooLarge { p: u32 },
    #[error("operator index {i} is not 2 or 3")]
    BadIndex { i: u32 },
    #[error("the (ξ−t) kernel requires D = 0, got {d}")]
    NotCritical { d: f64 },
    #[error("distinct-root branch requested with D = {d}")]
    BranchMismatch { d: f64 },
    #[error("RK4 needs at least 100 steps, got {steps}")]
    TooFewSteps { steps: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("exponent {exponent} is not λ± − m for integer m ≥ 0")]
    InexpressibleExponent { exponent: C64 },
    #[error("term t^{tpow} has no coefficient slot")]
    UnsupportedPower { tpow: u32 },
    #[error("ν(Γ) = {nu} outside [0, {bound})")]
    NuGammaOutOfRange { nu: f64, bound: f64 },
    #[error("ℓ = {ell} must exceed the switch depth {required}")]
    EllTooSmall { ell: usize, required: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Data of `y″ + (n−1)y′ + (ϖ−μ)y = 2e^{−t}G` with `y(0) = I0`, `y′(0) = I0′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeParams {
    pub n: usize,
    pub mu: f64,
    #[serde(serialize_with = "ser_q")]
    pub varpi: Q,
    pub d: f64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub lambda_plus: C64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub lambda_minus: C64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub i0: C64,
    #[serde(serialize_with = "crate::ser_c64")]
    pub i0_prime: C64,
}

impl OdeParams {
    /// Builds the parameters from `μ` and `ϖ`.
    pub fn new(n: usize, mu: f64, varpi: Q, i0: C64, i0_prime: C64) -> Result<Self, OdeError> {
        let v = varpi.to_f64().ok_or_else(|| OdeError::InvalidParams("ϖ not representable".into()))?;
        let half = (n as f64 - 1.0) / 2.0;
        Self::build(n, mu, varpi, half * half - (v - mu), i0, i0_prime)
    }

    /// Builds the parameters from a prescribed `D`, solving for `μ`.
    pub fn from_discriminant(n: usize, d: f64, varpi: Q, i0: C64, i0_prime: C64) -> Result<Self, OdeError> {
        let v = varpi.to_f64().ok_or_else(|| OdeError::InvalidParams("ϖ not representable".into()))?;
        let half = (n as f64 - 1.0) / 2.0;
        Self::build(n, v - (half * half - d), varpi, d, i0, i0_prime)
    }

    fn build(n: usize, mu: f64, varpi: Q, d: f64, i0: C64, i0_prime: C64) -> Result<Self, OdeError> {
        if n < 2 {
            return Err(OdeError::InvalidParams(format!("n = {n} < 2")));
        }
        if !(mu.is_finite() && d.is_finite() && i0.is_finite() && i0_prime.is_finite()) {
            return Err(OdeError::InvalidParams("non-finite input".into()));
        }
        let d = if d.abs() < CRITICAL_TOL { 0.0 } else { d };
        let sd = sqrt_of(d);
        let base = C64::new((1.0 - n as f64) / 2.0, 0.0);
        Ok(Self { n, mu, varpi, d, lambda_plus: base + sd, lambda_minus: base - sd, i0, i0_prime })
    }

    /// Same equation with new initial data.
    pub fn with_initial(&self, i0: C64, i0_prime: C64) -> Self {
        Self { i0, i0_prime, ..self.clone() }
    }

    /// `√D`, imaginary with positive imaginary part when `D < 0`.
    pub fn sqrt_d(&self) -> C64 {
        sqrt_of(self.d)
    }

    pub fn is_critical(&self) -> bool {
        self.d == 0.0
    }

    pub fn lambda(&self, sign: Sign) -> C64 {
        match sign {
            Sign::Plus => self.lambda_plus,
            Sign::Minus => self.lambda_minus,
        }
    }

    /// `ϖ − μ = (n−1)²/4 − D`.
    pub fn zeroth_order_coefficient(&self) -> f64 {
        let half = (self.n as f64 - 1.0) / 2.0;
        half * half - self.d
    }

    pub fn regime(&self) -> SqrtDClass {
        classify_sqrt_d(Scalar::Real(self.d), self.n).0
    }
}

fn sqrt_of(d: f64) -> C64 {
    if d >= 0.0 {
        C64::new(d.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-d).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_roots() {
        let p = OdeParams::from_discriminant(5, -1.0, Q::new(1, 2), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(p.lambda_plus, C64::new(-2.0, 1.0));
        assert_eq!(p.lambda_minus, C64::new(-2.0, -1.0));
        assert_eq!(p.regime(), SqrtDClass::Imaginary);
        let q = OdeParams::new(5, p.mu, Q::new(1, 2), p.i0, p.i0_prime).unwrap();
        assert!((q.d - p.d).abs() < 1e-12);
        let z = OdeParams::from_discriminant(4, 0.0, Q::new(0, 1), p.i0, p.i0_prime).unwrap();
        assert!(z.is_critical());
        assert_eq!(z.lambda_plus, z.lambda_minus);
        assert!(OdeParams::new(1, 0.0, Q::new(0, 1), p.i0, p.i0_prime).is_err());
    }
}
