//! Exact algebra: rationals, univariate polynomials over ℚ and ℚ(t),
//! weighted-homogeneous bivariate polynomials, and factorization over ℚ.

pub mod factor;
pub mod modp;
pub mod poly;
pub mod qpoly;
pub mod ratfunc;
pub mod rational;
pub mod whom;

pub use factor::{poly_factor, FactoredPoly};
pub use poly::{Field, Scalar, UniPoly};
pub use qpoly::{poly_gcd, poly_resultant, QPoly};
pub use ratfunc::RatFunc;
pub use rational::Q;
pub use whom::{multiplicity, whom_factor, whom_from_univariate, WHomPoly};
