//! Computational toolkit for the rank-one group SO(n,1).
//!
//! * [`lie_structure`]: the Lie algebra so(n,1), Killing form, Cartan involution
//!   and an Iwasawa-adapted orthonormal basis.
//! * [`iwasawa`]: group-level KAN factorization and finite-difference Casimir checks.
//! * [`repn_catalog`]: exact highest-weight arithmetic, series eigenvalues, branching.
//! * [`spectral_counting`]: Weyl dimensions, K-type enumeration, counting and summability.
//! * [`ode_expansion`]: exponential-polynomial algebra, integral operators, the rank-one
//!   ODE and its iterated expansion.
//! * [`cli`]: command-line front end and the reproduction suite.

pub mod cli;
pub mod iwasawa;
pub mod lie_structure;
pub mod ode_expansion;
pub mod repn_catalog;
pub mod spectral_counting;

/// Complex double used throughout the analytic modules.
pub type C64 = num_complex::Complex64;
/// Exact rational used for weight arithmetic.
pub type Q = num_rational::Rational64;

/// Serializes a complex number as `{"re": .., "im": ..}`.
pub fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}
