//! Tamagawa-ratio statistics for one-parameter families of elliptic curves
//! with a rational isogeny of prime degree.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`] — exact polynomials over ℚ and ℚ(t), weighted-homogeneous
//!   polynomials, factorization over ℚ;
//! * [`arith`] — primes, factorization, Legendre symbols, square tests;
//! * [`curves`] — short Weierstrass models, heights, reduction types and
//!   Tamagawa numbers at multiplicative primes;
//! * [`isogeny`] — Vélu's formulas over ℚ(t) and point-count verification;
//! * [`family`] — the family registry, discriminant splitting and the
//!   constants `u±, v±, c±, μ, σ², ρ(k)`;
//! * [`enumerate`] — enumeration of parameter points by height, congruence
//!   densities and local densities;
//! * [`statlab`] — per-curve local exponents and the family experiments.
//!
//! The polynomial core is generic over the coefficient type (see
//! [`algebra::Scalar`]); the aliases below fix the common instantiations.

pub mod algebra;
pub mod arith;
pub mod curves;
pub mod enumerate;
pub mod error;
pub mod family;
pub mod isogeny;
pub mod statlab;

pub use error::{Error, Result};

/// Exact rational scalar.
pub type Rational = algebra::rational::Q;
/// Polynomials with exact rational coefficients.
pub type QPoly = algebra::UniPoly<Rational>;
/// Polynomials with `f64` coefficients (numeric bracketing only).
pub type F64Poly = algebra::UniPoly<f64>;
/// Polynomials with `f32` coefficients.
pub type F32Poly = algebra::UniPoly<f32>;
/// Polynomials in `x` over the function field ℚ(t).
pub type FunctionFieldPoly = algebra::UniPoly<algebra::RatFunc>;
