//! Bounds on the common divisibility of two weighted forms at coprime-style
//! parameter points: the constant `Λ` with `n¹² | gcd(A³, B²) ⇒ n | Λ`.
//!
//! For each candidate prime `p` the largest `K` with `p^{w₁K} | F₁(a,b)` and
//! `p^{w₂K} | F₂(a,b)` for some `(a,b) ∈ 𝒯_{υ,τ}` is found by a depth-first
//! lifting search over residues mod `pʲ`.  Weighted scaling
//! `(a,b) ↦ (λ^τ a, λb)` by `p`-adic units preserves both conditions, so the
//! search normalizes `b` to `p^r` (or `b ≡ 0`) and only `a` branches.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::qpoly::{int_coeffs, primitive_decomposition};
use crate::algebra::rational::Q;
use crate::algebra::whom::WHomPoly;
use crate::arith::factor_integer;
use crate::error::{Error, Result};

/// Default bound on the number of visited search nodes per `(p, K)`.
pub const NODE_GUARD: usize = 2_000_000;

/// Integer form `Σ cᵢ xⁱ y^{w − τi}` evaluated modulo a prime power.
struct ModForm {
    /// `(i, j, c mod pᴶ)` for each term.
    terms: Vec<(u32, u32, u128)>,
}

fn pow_mod(mut b: u128, mut e: u32, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

impl ModForm {
    fn new(f: &WHomPoly, modulus: &BigInt) -> Self {
        let ints = f.int_coeffs().expect("integral form");
        let terms = f
            .terms()
            .keys()
            .map(|&(i, j)| {
                let c = &ints[i as usize];
                let r = ((c % modulus) + modulus) % modulus;
                (i, j, r.to_u128().expect("modulus fits u128"))
            })
            .collect();
        ModForm { terms }
    }

    fn eval(&self, a: u128, b: u128, m: u128) -> u128 {
        self.terms.iter().fold(0u128, |acc, &(i, j, c)| {
            let t = c % m * pow_mod(a, i, m) % m * pow_mod(b, j, m) % m;
            (acc + t) % m
        })
    }
}

/// Search state: `a mod pʲ`, and `b = p^r` (`Some(r)`, `r < j`) or
/// `b ≡ 0 mod pʲ` (`None`).
#[derive(Clone, Copy)]
struct Node {
    j: u32,
    a: u128,
    r: Option<u32>,
}

/// Whether some `(a,b) ∈ 𝒯_{υ,τ}` has `p^{w₁K} | F₁(a,b)` and `p^{w₂K} | F₂(a,b)`.
#[allow(clippy::too_many_arguments)]
fn exists_common_power(
    f1: &WHomPoly,
    f2: &WHomPoly,
    w: (u32, u32),
    p: u64,
    k: u32,
    upsilon: u32,
    tau: u32,
    guard: usize,
) -> Result<bool> {
    let need = (w.0 * k, w.1 * k);
    let depth = need.0.max(need.1).max(upsilon * tau);
    let pb = BigInt::from(p);
    let top = num_traits::pow(pb.clone(), depth as usize + 1);
    if top.bits() > 63 {
        return Err(Error::Resource(format!("{p}^{depth} exceeds the modular word size")));
    }
    let m1 = ModForm::new(f1, &top);
    let m2 = ModForm::new(f2, &top);
    let pu = p as u128;
    let ppow = |e: u32| pu.pow(e);
    let excluded = |n: &Node| -> bool {
        // (a,b) ∉ 𝒯 once p^{υτ} | a and p^υ | b are decided.
        let ut = upsilon * tau;
        if n.j < ut {
            return false;
        }
        let b_div = match n.r {
            Some(r) => r >= upsilon,
            None => true,
        };
        n.a % ppow(ut) == 0 && b_div
    };
    let mut stack = vec![Node { j: 0, a: 0, r: None }];
    let mut visited = 0usize;
    while let Some(n) = stack.pop() {
        visited += 1;
        if visited > guard {
            return Err(Error::Resource(format!(
                "lifting search at p = {p}, K = {k} exceeded {guard} nodes"
            )));
        }
        if n.j > 0 {
            if excluded(&n) {
                continue;
            }
            let m = ppow(n.j);
            let b = match n.r {
                Some(r) => ppow(r) % m,
                None => 0,
            };
            let ok = |form: &ModForm, e: u32| {
                let mm = ppow(n.j.min(e));
                form.eval(n.a % mm, b % mm, mm) == 0
            };
            if !ok(&m1, need.0) || !ok(&m2, need.1) {
                continue;
            }
            if n.j >= depth {
                return Ok(true);
            }
        }
        let step = ppow(n.j);
        let rs: Vec<Option<u32>> = match n.r {
            Some(r) => vec![Some(r)],
            None => vec![Some(n.j), None],
        };
        for r in rs {
            for d in 0..pu {
                stack.push(Node {
                    j: n.j + 1,
                    a: n.a + d * step,
                    r,
                });
            }
        }
    }
    Ok(false)
}

/// Largest `K ≥ 0` with a common `(p^{w₁K}, p^{w₂K})` divisibility on `𝒯`.
#[allow(clippy::too_many_arguments)]
pub fn max_common_power(
    f1: &WHomPoly,
    f2: &WHomPoly,
    w: (u32, u32),
    p: u64,
    upsilon: u32,
    tau: u32,
    guard: usize,
) -> Result<u32> {
    let mut k = 0;
    while exists_common_power(f1, f2, w, p, k + 1, upsilon, tau, guard)? {
        k += 1;
        if k > 64 {
            return Err(Error::Resource(format!("unbounded common power at {p}")));
        }
    }
    Ok(k)
}

/// Primes dividing the numerator or denominator of a nonzero rational.
pub fn rational_primes(x: &Q) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for n in [x.numer(), x.denom()] {
        if n.is_zero() || n.abs().is_one() {
            continue;
        }
        for (p, _) in factor_integer(n)?.factors {
            out.insert(p.to_u64().ok_or_else(|| Error::Resource(format!("prime {p} too large")))?);
        }
    }
    Ok(out)
}

/// Primes `p` at which two weighted forms (no common factor) acquire a
/// common zero mod `p` — the prime support of their homogeneous resultant,
/// together with the content primes of each form.
pub fn hom_resultant_primes(f: &WHomPoly, g: &WHomPoly) -> Result<BTreeSet<u64>> {
    let (ey_f, ey_g) = (f.y_multiplicity(), g.y_multiplicity());
    if ey_f > 0 && ey_g > 0 {
        return Err(Error::Domain("forms share the factor y".into()));
    }
    let (cf, fi) = primitive_decomposition(f.dehomogenize());
    let (cg, gi) = primitive_decomposition(g.dehomogenize());
    let mut out = rational_primes(&cf)?;
    out.extend(rational_primes(&cg)?);
    let fp = crate::algebra::qpoly::qpoly_big(&fi);
    let gp = crate::algebra::qpoly::qpoly_big(&gi);
    if fp.degree().unwrap_or(0) > 0 && gp.degree().unwrap_or(0) > 0 {
        let r = crate::algebra::qpoly::poly_resultant(&fp, &gp)?;
        if r.is_zero() {
            return Err(Error::Domain("forms share a factor".into()));
        }
        out.extend(rational_primes(&r)?);
    }
    // A zero at [1 : 0] of one form: the other form's value there.
    if ey_f > 0 {
        out.extend(rational_primes(&Q::from_integer(gi.last().expect("nonzero").clone()))?);
    }
    if ey_g > 0 {
        out.extend(rational_primes(&Q::from_integer(fi.last().expect("nonzero").clone()))?);
    }
    Ok(out)
}

/// Candidate primes for `Λ`: those where `F₁`, `F₂` can vanish together mod `p`.
pub fn lambda_candidates(f1: &WHomPoly, f2: &WHomPoly) -> Result<BTreeSet<u64>> {
    hom_resultant_primes(f1, f2)
}

/// `∏ p^{K_p}` over the candidate primes, with the per-prime exponents.
pub fn common_power_constant(
    f1: &WHomPoly,
    f2: &WHomPoly,
    w: (u32, u32),
    upsilon: u32,
    tau: u32,
) -> Result<(BigInt, Vec<(u64, u32)>)> {
    for f in [f1, f2] {
        if int_coeffs(f.dehomogenize()).is_none() {
            return Err(Error::Domain("forms must have integer coefficients".into()));
        }
    }
    let mut out = BigInt::one();
    let mut exps = Vec::new();
    for p in lambda_candidates(f1, f2)? {
        let k = max_common_power(f1, f2, w, p, upsilon, tau, NODE_GUARD)?;
        if k > 0 {
            out *= num_traits::pow(BigInt::from(p), k as usize);
            exps.push((p, k));
        }
    }
    Ok((out, exps))
}

/// Brute-force `max K` over a box, for tests: `n` with `p^{w₁K} | F₁`, `p^{w₂K} | F₂`.
pub fn brute_common_power(
    f1: &WHomPoly,
    f2: &WHomPoly,
    w: (u32, u32),
    p: u64,
    upsilon: u32,
    tau: u32,
    bound: i64,
) -> u32 {
    let mut best = 0;
    for a in -bound..=bound {
        for b in -bound..=bound {
            if (a, b) == (0, 0)
                || !crate::enumerate::in_coprimality_set(a, b, upsilon, tau).unwrap_or(false)
            {
                continue;
            }
            let (ab, bb) = (BigInt::from(a), BigInt::from(b));
            let v1 = f1.eval_int(&ab, &bb).expect("integral");
            let v2 = f2.eval_int(&ab, &bb).expect("integral");
            let val = |v: &BigInt| crate::arith::valuation(v, p);
            let k = if v1.is_zero() && v2.is_zero() {
                continue;
            } else if v1.is_zero() {
                val(&v2) / w.1
            } else if v2.is_zero() {
                val(&v1) / w.0
            } else {
                (val(&v1) / w.0).min(val(&v2) / w.1)
            };
            best = best.max(k);
        }
    }
    best
}
