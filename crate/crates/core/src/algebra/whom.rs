//! Weighted-homogeneous bivariate polynomials with weights `(τ, 1)`.
//!
//! A polynomial `P(x, y)` of weighted degree `w` is stored through its
//! dehomogenization `p(t) = P(t, 1)`: `P(x, y) = y^w · p(x / y^τ)`.  The
//! exponent of `y` dividing `P` is `w − τ·deg p`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use super::factor::{factor_order, poly_factor, FactoredPoly};
use super::qpoly::{int_coeffs, poly_from_json, poly_multiplicity, poly_to_json, QPoly};
use super::rational::{fmt_q, qi, Q};
use crate::error::{Error, Result};

/// `y^w · p(x/y^τ)`.
#[derive(Clone, PartialEq, Debug)]
pub struct WHomPoly {
    tau: u32,
    wdeg: u32,
    p: QPoly,
}

impl WHomPoly {
    /// Builds `y^w · p(x/y^τ)`; requires `τ·deg p ≤ w` (zero `p` allowed).
    pub fn new(tau: u32, wdeg: u32, p: QPoly) -> Result<Self> {
        if tau == 0 {
            return Err(Error::Domain("weight τ must be at least 1".into()));
        }
        if let Some(d) = p.degree() {
            if tau as usize * d > wdeg as usize {
                return Err(Error::Domain(format!(
                    "τ·deg = {} exceeds weighted degree {wdeg}",
                    tau as usize * d
                )));
            }
        }
        Ok(WHomPoly { tau, wdeg, p })
    }

    /// The monomial `y`.
    pub fn y(tau: u32) -> Self {
        WHomPoly {
            tau,
            wdeg: 1,
            p: QPoly::one(),
        }
    }

    /// A constant.
    pub fn constant(tau: u32, c: Q) -> Self {
        WHomPoly {
            tau,
            wdeg: 0,
            p: QPoly::constant(c),
        }
    }

    /// Lifts an irreducible-style univariate `q(t)` to `y^{τ deg q} q(x/y^τ)`.
    pub fn lift(tau: u32, q: QPoly) -> Self {
        let d = q.degree().unwrap_or(0) as u32;
        WHomPoly {
            tau,
            wdeg: tau * d,
            p: q,
        }
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn weighted_degree(&self) -> u32 {
        self.wdeg
    }

    /// The dehomogenization `P(t, 1)`.
    pub fn dehomogenize(&self) -> &QPoly {
        &self.p
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero()
    }

    /// Exponent of `y` dividing `P` (for nonzero `P`).
    pub fn y_multiplicity(&self) -> u32 {
        self.wdeg - self.tau * self.p.degree().unwrap_or(0) as u32
    }

    /// Terms as a map `(i, j) ↦ c` for `c·x^i y^j`, `iτ + j = w`.
    pub fn terms(&self) -> BTreeMap<(u32, u32), Q> {
        self.p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| ((i as u32, self.wdeg - self.tau * i as u32), c.clone()))
            .collect()
    }

    /// Integer coefficients of `P(t,1)` if integral.
    pub fn int_coeffs(&self) -> Option<Vec<BigInt>> {
        int_coeffs(&self.p)
    }

    /// Product (weights must agree).
    pub fn mul(&self, o: &WHomPoly) -> WHomPoly {
        assert_eq!(self.tau, o.tau, "weights differ");
        WHomPoly {
            tau: self.tau,
            wdeg: self.wdeg + o.wdeg,
            p: &self.p * &o.p,
        }
    }

    pub fn pow(&self, e: u32) -> WHomPoly {
        WHomPoly {
            tau: self.tau,
            wdeg: self.wdeg * e,
            p: self.p.pow(e),
        }
    }

    pub fn scale(&self, c: &Q) -> WHomPoly {
        WHomPoly {
            tau: self.tau,
            wdeg: self.wdeg,
            p: self.p.scale(c),
        }
    }

    /// Exact value at a rational point.
    pub fn eval_q(&self, a: &Q, b: &Q) -> Q {
        let mut acc = Q::zero();
        let mut apow = Q::one();
        for (i, c) in self.p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let j = self.wdeg - self.tau * i as u32;
                acc += c * &apow * num_traits::pow(b.clone(), j as usize);
            }
            apow *= a;
        }
        acc
    }

    /// Exact value at an integer point.
    pub fn eval(&self, a: &BigInt, b: &BigInt) -> Q {
        self.eval_q(&qi(a), &qi(b))
    }

    /// Exact integer value at an integer point (integral coefficients only).
    pub fn eval_int(&self, a: &BigInt, b: &BigInt) -> Option<BigInt> {
        let v = self.eval(a, b);
        v.is_integer().then(|| v.to_integer())
    }

    /// JSON form: `{"tau": τ, "weighted_degree": w, "dehomogenized": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({"tau": self.tau, "weighted_degree": self.wdeg, "dehomogenized": poly_to_json(&self.p)})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let tau = v["tau"]
            .as_u64()
            .ok_or_else(|| Error::Parse("missing tau".into()))? as u32;
        let w = v["weighted_degree"]
            .as_u64()
            .ok_or_else(|| Error::Parse("missing weighted_degree".into()))? as u32;
        WHomPoly::new(tau, w, poly_from_json(&v["dehomogenized"])?)
    }

    /// Formats in the variables `a`, `b`, e.g. `a^2 + 11*a*b - b^2`.
    pub fn format(&self) -> String {
        if self.p.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for ((i, j), c) in self.terms().into_iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            out.push_str(match (out.is_empty(), neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            });
            let mut parts = Vec::new();
            if !a.is_one() || (i == 0 && j == 0) {
                parts.push(fmt_q(&a));
            }
            for (v, e) in [("a", i), ("b", j)] {
                match e {
                    0 => {}
                    1 => parts.push(v.to_string()),
                    _ => parts.push(format!("{v}^{e}")),
                }
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

impl fmt::Display for WHomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

/// `y^{kς} h(x/y^τ)` for `k = 2` (coefficient `A`) or `k = 3` (`B`).
pub fn whom_from_univariate(h: &QPoly, tau: u32, varsigma: u32, power: u32) -> Result<WHomPoly> {
    if power != 2 && power != 3 {
        return Err(Error::Domain(format!("power must be 2 or 3, got {power}")));
    }
    WHomPoly::new(tau, power * varsigma, h.clone())
}

/// Factors a nonzero weighted-homogeneous polynomial: the explicit `y`-power
/// plus the lifts of the factors of `P(t, 1)`.
pub fn whom_factor(p: &WHomPoly) -> Result<FactoredPoly<WHomPoly>> {
    if p.is_zero() {
        return Err(Error::Domain("cannot factor the zero polynomial".into()));
    }
    let fp = poly_factor(&p.p)?;
    let mut factors = Vec::new();
    let ey = p.y_multiplicity();
    if ey > 0 {
        factors.push((WHomPoly::y(p.tau), ey));
    }
    let mut rest: Vec<(QPoly, u32)> = fp.factors;
    rest.sort_by(|a, b| factor_order(&a.0, &b.0));
    factors.extend(rest.into_iter().map(|(q, e)| (WHomPoly::lift(p.tau, q), e)));
    Ok(FactoredPoly {
        content: fp.content,
        factors,
    })
}

impl FactoredPoly<WHomPoly> {
    /// Multiplies the factorization back out (weights `τ` from the factors,
    /// defaulting to `tau` when there are none).
    pub fn expand(&self, tau: u32) -> WHomPoly {
        self.factors
            .iter()
            .fold(WHomPoly::constant(tau, self.content.clone()), |acc, (f, e)| {
                acc.mul(&f.pow(*e))
            })
    }
}

/// Largest `e` with `Qᵉ | P`, for irreducible `Q`.
pub fn multiplicity(p: &WHomPoly, q: &WHomPoly) -> u32 {
    if q.p.is_constant() && q.wdeg == 1 {
        return p.y_multiplicity();
    }
    if q.y_multiplicity() > 0 {
        return 0;
    }
    poly_multiplicity(&p.p, &q.p)
}

/// `gcd` of two weighted-homogeneous polynomials (monic-normalized content).
pub fn whom_gcd(p: &WHomPoly, q: &WHomPoly) -> WHomPoly {
    let g = super::qpoly::normalize(&p.p.gcd(&q.p));
    let ey = p.y_multiplicity().min(q.y_multiplicity());
    WHomPoly::lift(p.tau, g).mul(&WHomPoly::y(p.tau).pow(ey))
}
