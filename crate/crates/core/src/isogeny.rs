//! Vélu's formulas over the function field ℚ(t) and point-count
//! verification of isogenous pairs.
//!
//! Models are `y² = x³ + f(t)x + g(t)`.  For a kernel of odd order `ℓ`
//! given by its kernel polynomial `ψ(x) = ∏ (x − x_Q)` over the `(ℓ−1)/2`
//! pairs `±Q`, the codomain is `(f − 5T, g − 7W)` with
//! `T = Σ (6x_Q² + 2f)` and `W = Σ (10x_Q³ + 6f·x_Q + 4g)`, which only need
//! the power sums of the roots of `ψ`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::algebra::poly::{embed_nat, UniPoly};
use crate::algebra::qpoly::{poly_from_json, poly_to_json, QPoly};
use crate::algebra::rational::{denom_lcm, qi, Q};
use crate::algebra::RatFunc;
use crate::arith::{factor_integer, primes_up_to};
use crate::curves::{count_points_raw, disc_of};
use crate::error::{Error, Result};

/// Polynomial in `x` with coefficients in ℚ(t).
pub type KernelPoly = UniPoly<RatFunc>;

/// How the isogeny's kernel (or codomain) is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// `x`-coordinate of a rational 2-torsion point, as a polynomial in `t`.
    TwoTorsionX(QPoly),
    /// Monic kernel polynomial in `x` of degree `(ℓ−1)/2` over ℚ(t).
    KernelPolynomial(KernelPoly),
    /// Codomain coefficients given directly.
    ExplicitCodomain(QPoly, QPoly),
}

impl KernelSpec {
    /// Registry JSON form `{type, data}`.
    pub fn to_json(&self) -> Value {
        match self {
            KernelSpec::TwoTorsionX(x0) => json!({"type": "two_torsion_x", "data": poly_to_json(x0)}),
            KernelSpec::KernelPolynomial(psi) => {
                let coeffs: Vec<Value> = psi
                    .coeffs()
                    .iter()
                    .map(|c| {
                        if c.denom().is_one() {
                            poly_to_json(c.numer())
                        } else {
                            json!({"num": poly_to_json(c.numer()), "den": poly_to_json(c.denom())})
                        }
                    })
                    .collect();
                json!({"type": "kernel_polynomial", "data": coeffs})
            }
            KernelSpec::ExplicitCodomain(f, g) => json!({
                "type": "explicit_codomain",
                "data": {"f": poly_to_json(f), "g": poly_to_json(g)}
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ty = v["type"]
            .as_str()
            .ok_or_else(|| Error::Parse("kernel.type missing".into()))?;
        let data = &v["data"];
        match ty {
            "two_torsion_x" => Ok(KernelSpec::TwoTorsionX(poly_from_json(data)?)),
            "kernel_polynomial" => {
                let arr = data
                    .as_array()
                    .ok_or_else(|| Error::Parse("kernel.data must be an array".into()))?;
                let coeffs = arr
                    .iter()
                    .map(|c| {
                        if c.is_object() {
                            Ok(RatFunc::new(poly_from_json(&c["num"])?, poly_from_json(&c["den"])?))
                        } else {
                            Ok(RatFunc::from_poly(poly_from_json(c)?))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(KernelSpec::KernelPolynomial(UniPoly::new(coeffs)))
            }
            "explicit_codomain" => Ok(KernelSpec::ExplicitCodomain(
                poly_from_json(&data["f"])?,
                poly_from_json(&data["g"])?,
            )),
            other => Err(Error::Parse(format!("unknown kernel type {other:?}"))),
        }
    }
}

/// Domain and codomain of a degree-`ℓ` isogeny over ℚ(t).
#[derive(Clone, Debug, PartialEq)]
pub struct IsogenyPair {
    pub f: QPoly,
    pub g: QPoly,
    pub f_prime: QPoly,
    pub g_prime: QPoly,
    pub ell: u64,
}

/// `4f³ + 27g²` as a polynomial.
pub fn disc_poly(f: &QPoly, g: &QPoly) -> QPoly {
    let four = QPoly::constant(Q::from_integer(4.into()));
    let tw7 = QPoly::constant(Q::from_integer(27.into()));
    &(&four * &f.pow(3)) + &(&tw7 * &g.pow(2))
}

/// Rescales `(f, g) ↦ (λ⁴f, λ⁶g)` with the least positive integer `λ` making
/// both integral.
pub fn clear_to_integral(f: &QPoly, g: &QPoly) -> (QPoly, QPoly) {
    let d = denom_lcm(f.coeffs().iter().chain(g.coeffs()));
    if d.is_one() {
        return (f.clone(), g.clone());
    }
    let df = denom_lcm(f.coeffs());
    let dg = denom_lcm(g.coeffs());
    let mut lambda = BigInt::one();
    let fac = factor_integer(&d).expect("nonzero");
    for (p, _) in fac.factors {
        let pu = p.to_u64().expect("small prime");
        let vf = crate::arith::valuation(&df, pu);
        let vg = crate::arith::valuation(&dg, pu);
        let k = vf.div_ceil(4).max(vg.div_ceil(6));
        lambda *= num_traits::pow(p, k as usize);
    }
    let l = qi(&lambda);
    let l4 = num_traits::pow(l.clone(), 4);
    let l6 = num_traits::pow(l, 6);
    (f.scale(&l4), g.scale(&l6))
}

/// 2-isogeny with kernel generated by `(x₀, 0)`.
pub fn velu_two_isogeny(f: &QPoly, g: &QPoly, x0: &QPoly) -> Result<(QPoly, QPoly)> {
    let cubic = &(&x0.pow(3) + &(f * x0)) + g;
    if !cubic.is_zero() {
        return Err(Error::KernelValidation(
            "x₀ is not a root of x³ + f·x + g".into(),
        ));
    }
    let three = QPoly::constant(Q::from_integer(3.into()));
    let tv = &(&three * &x0.pow(2)) + f;
    let w = x0 * &tv;
    let fp = f - &tv.scale(&Q::from_integer(5.into()));
    let gp = g - &w.scale(&Q::from_integer(7.into()));
    Ok(clear_to_integral(&fp, &gp))
}

/// The "reduced" division polynomials `φ_n` over a field `F`, with
/// `ψ_n = φ_n` for odd `n` and `ψ_n = 2y·φ_n` for even `n`.
pub struct DivisionPolynomials<F: crate::algebra::Field> {
    f: F,
    g: F,
    memo: HashMap<usize, UniPoly<F>>,
}

impl<F: crate::algebra::Field> DivisionPolynomials<F> {
    pub fn new(f: F, g: F) -> Self {
        DivisionPolynomials {
            f,
            g,
            memo: HashMap::new(),
        }
    }

    fn e_sq(&self) -> UniPoly<F> {
        let e = UniPoly::new(vec![self.g.clone(), self.f.clone(), F::zero(), F::one()]);
        &e * &e
    }

    /// `φ_n`.
    pub fn get(&mut self, n: usize) -> UniPoly<F> {
        if let Some(p) = self.memo.get(&n) {
            return p.clone();
        }
        let (f, g) = (self.f.clone(), self.g.clone());
        let c = |k: usize| embed_nat::<F>(k);
        let out = match n {
            0 => UniPoly::zero(),
            1 | 2 => UniPoly::one(),
            3 => UniPoly::new(vec![
                -(f.clone() * f.clone()),
                c(12) * g.clone(),
                c(6) * f.clone(),
                F::zero(),
                c(3),
            ]),
            4 => UniPoly::new(vec![
                -(c(16) * g.clone() * g.clone()) - c(2) * f.clone() * f.clone() * f.clone(),
                -(c(8) * f.clone() * g.clone()),
                -(c(10) * f.clone() * f.clone()),
                c(40) * g.clone(),
                c(10) * f.clone(),
                F::zero(),
                c(2),
            ]),
            _ if n % 2 == 1 => {
                let m = (n - 1) / 2;
                let sixteen_e2 = self.e_sq().scale(&c(16));
                let a = &self.get(m + 2) * &self.get(m).pow(3);
                let b = &self.get(m - 1) * &self.get(m + 1).pow(3);
                if m % 2 == 0 {
                    &(&sixteen_e2 * &a) - &b
                } else {
                    &a - &(&sixteen_e2 * &b)
                }
            }
            _ => {
                let m = n / 2;
                let inner = &(&self.get(m + 2) * &self.get(m - 1).pow(2))
                    - &(&self.get(m - 2) * &self.get(m + 1).pow(2));
                &self.get(m) * &inner
            }
        };
        self.memo.insert(n, out.clone());
        out
    }
}

/// Power sums `p₁, p₂, p₃` of the roots of a monic polynomial.
fn power_sums<F: crate::algebra::Field>(psi: &UniPoly<F>) -> (F, F, F) {
    let n = psi.degree().unwrap_or(0);
    let c = |k: usize| -> F {
        if k <= n {
            psi.coeff(n - k)
        } else {
            F::zero()
        }
    };
    let e1 = -c(1);
    let e2 = c(2);
    let e3 = -c(3);
    let p1 = e1.clone();
    let p2 = e1.clone() * p1.clone() - embed_nat::<F>(2) * e2.clone();
    let p3 = e1 * p2.clone() - e2 * p1.clone() + embed_nat::<F>(3) * e3;
    (p1, p2, p3)
}

/// Odd-degree Vélu from a kernel polynomial over ℚ(t).
///
/// Validates that `ψ` is monic of degree `(ℓ−1)/2` and divides the
/// `ℓ`-division polynomial, computes the codomain, clears denominators, and
/// confirms the result by point counts before returning.
pub fn velu_odd_isogeny(
    f: &QPoly,
    g: &QPoly,
    psi: &KernelPoly,
    ell: u64,
) -> Result<(QPoly, QPoly)> {
    if ell < 3 || ell % 2 == 0 {
        return Err(Error::KernelValidation(format!("ℓ = {ell} is not odd")));
    }
    let n = ((ell - 1) / 2) as usize;
    if psi.degree() != Some(n) || !psi.lc().is_some_and(|c| c.is_one()) {
        return Err(Error::KernelValidation(format!(
            "kernel polynomial must be monic of degree {n}"
        )));
    }
    let ff = RatFunc::from_poly(f.clone());
    let gg = RatFunc::from_poly(g.clone());
    let mut dp = DivisionPolynomials::new(ff.clone(), gg.clone());
    let div = dp.get(ell as usize);
    if div.exact_div(psi).is_none() {
        return Err(Error::KernelValidation(format!(
            "kernel polynomial does not divide the {ell}-division polynomial"
        )));
    }
    let (p1, p2, p3) = power_sums(psi);
    let nn = embed_nat::<RatFunc>(n);
    let t = embed_nat::<RatFunc>(6) * p2 + embed_nat::<RatFunc>(2) * ff.clone() * nn.clone();
    let w = embed_nat::<RatFunc>(10) * p3
        + embed_nat::<RatFunc>(6) * ff.clone() * p1
        + embed_nat::<RatFunc>(4) * gg.clone() * nn;
    let fp = ff - embed_nat::<RatFunc>(5) * t;
    let gp = gg - embed_nat::<RatFunc>(7) * w;
    let (Some(fp), Some(gp)) = (fp.as_poly(), gp.as_poly()) else {
        return Err(Error::KernelValidation(
            "codomain coefficients are not polynomials in t".into(),
        ));
    };
    let (fp, gp) = clear_to_integral(fp, gp);
    let pair = IsogenyPair {
        f: f.clone(),
        g: g.clone(),
        f_prime: fp.clone(),
        g_prime: gp.clone(),
        ell,
    };
    let samples: Vec<Q> = (2..7).map(|k| Q::from_integer(k.into())).collect();
    let primes: Vec<u64> = primes_up_to(200).into_iter().filter(|&p| p > 3).collect();
    if !verify_isogeny(&pair, &samples, &primes)? {
        return Err(Error::KernelValidation(
            "codomain failed the point-count check".into(),
        ));
    }
    Ok((fp, gp))
}

/// Integral Weierstrass coefficients `(λ⁴A, λ⁶B)` of `(f(t), g(t))` at a
/// rational `t`.
pub fn specialize(f: &QPoly, g: &QPoly, t: &Q) -> (BigInt, BigInt) {
    let a = f.eval(t);
    let b = g.eval(t);
    let (fi, gi) = clear_to_integral(&QPoly::constant(a), &QPoly::constant(b));
    (fi.coeff(0).to_integer(), gi.coeff(0).to_integer())
}

/// Outcome of a point-count comparison.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// `(t, p)` pairs actually compared.
    pub compared: usize,
    /// Pairs with differing counts: `(t, p, #E, #E′)`.
    pub mismatches: Vec<(String, u64, u64, u64)>,
}

/// Compares `#E_t(𝔽_p)` and `#E′_t(𝔽_p)` over all samples and good primes.
pub fn verify_isogeny_report(pair: &IsogenyPair, t_samples: &[Q], primes: &[u64]) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    for t in t_samples {
        let (a, b) = specialize(&pair.f, &pair.g, t);
        let (a2, b2) = specialize(&pair.f_prime, &pair.g_prime, t);
        let d1 = disc_of(&a, &b);
        let d2 = disc_of(&a2, &b2);
        if d1.is_zero() || d2.is_zero() {
            continue;
        }
        for &p in primes {
            if p <= 3 {
                continue;
            }
            let pb = BigInt::from(p);
            if (&d1 % &pb).is_zero() || (&d2 % &pb).is_zero() {
                continue;
            }
            let r = |x: &BigInt| x.mod_floor(&pb).to_u64().expect("residue");
            let n1 = count_points_raw(r(&a), r(&b), p);
            let n2 = count_points_raw(r(&a2), r(&b2), p);
            rep.compared += 1;
            if n1 != n2 {
                rep.mismatches.push((t.to_string(), p, n1, n2));
            }
        }
    }
    if rep.compared == 0 {
        return Err(Error::Inconclusive(
            "every sample was singular or of bad reduction".into(),
        ));
    }
    Ok(rep)
}

/// `true` iff all compared point counts agree.
pub fn verify_isogeny(pair: &IsogenyPair, t_samples: &[Q], primes: &[u64]) -> Result<bool> {
    Ok(verify_isogeny_report(pair, t_samples, primes)?
        .mismatches
        .is_empty())
}

/// Builds the isogeny pair described by a kernel specification.
pub fn isogeny_pair(f: &QPoly, g: &QPoly, kernel: &KernelSpec, ell: u64) -> Result<IsogenyPair> {
    let (fp, gp) = match kernel {
        KernelSpec::TwoTorsionX(x0) => {
            if ell != 2 {
                return Err(Error::KernelValidation("2-torsion kernel needs ℓ = 2".into()));
            }
            velu_two_isogeny(f, g, x0)?
        }
        KernelSpec::KernelPolynomial(psi) => velu_odd_isogeny(f, g, psi, ell)?,
        KernelSpec::ExplicitCodomain(fp, gp) => {
            let pair = IsogenyPair {
                f: f.clone(),
                g: g.clone(),
                f_prime: fp.clone(),
                g_prime: gp.clone(),
                ell,
            };
            let samples: Vec<Q> = (2..9).map(|k| Q::from_integer(k.into())).collect();
            let primes: Vec<u64> = primes_up_to(400).into_iter().filter(|&p| p > 3).collect();
            if !verify_isogeny(&pair, &samples, &primes)? {
                return Err(Error::KernelValidation(
                    "explicit codomain is not isogenous by point counts".into(),
                ));
            }
            (fp.clone(), gp.clone())
        }
    };
    let pair = IsogenyPair {
        f: f.clone(),
        g: g.clone(),
        f_prime: fp,
        g_prime: gp,
        ell,
    };
    if disc_poly(&pair.f, &pair.g).is_zero() || disc_poly(&pair.f_prime, &pair.g_prime).is_zero() {
        return Err(Error::KernelValidation("singular generic fibre".into()));
    }
    Ok(pair)
}

/// `j`-invariant numerator/denominator form: returns `(f³, 4f³ + 27g²)`.
pub fn j_parts(f: &QPoly, g: &QPoly) -> (QPoly, QPoly) {
    (f.pow(3), disc_poly(f, g))
}

/// Whether two models over ℚ(t) have the same `j`-invariant.
pub fn same_j(f1: &QPoly, g1: &QPoly, f2: &QPoly, g2: &QPoly) -> bool {
    let (n1, d1) = j_parts(f1, g1);
    let (n2, d2) = j_parts(f2, g2);
    &n1 * &d2 == &n2 * &d1
}

/// `t^k · h(c/t)` for `k ≥ deg h` — the substitution `t ↦ c/t` with
/// denominators cleared.
pub fn invert_parameter(h: &QPoly, c: &Q, k: usize) -> QPoly {
    let mut out = vec![Q::zero(); k + 1];
    for (i, a) in h.coeffs().iter().enumerate() {
        out[k - i] = a * num_traits::pow(c.clone(), i);
    }
    UniPoly::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qpoly::qpoly;

    #[test]
    fn two_isogeny_of_x3_minus_x() {
        let (fp, gp) = velu_two_isogeny(&qpoly(&[-1]), &qpoly(&[]), &qpoly(&[])).unwrap();
        assert_eq!((fp.clone(), gp.clone()), (qpoly(&[4]), qpoly(&[])));
        let pair = IsogenyPair {
            f: qpoly(&[-1]),
            g: qpoly(&[]),
            f_prime: fp,
            g_prime: gp,
            ell: 2,
        };
        assert!(verify_isogeny(&pair, &[Q::zero()], &[5, 7, 11, 13]).unwrap());
        let wrong = IsogenyPair {
            f_prime: qpoly(&[5]),
            ..pair
        };
        assert!(!verify_isogeny(&wrong, &[Q::zero()], &[5, 7, 11, 13]).unwrap());
    }

    #[test]
    fn two_torsion_must_be_a_root() {
        assert!(matches!(
            velu_two_isogeny(&qpoly(&[-1]), &qpoly(&[]), &qpoly(&[2])),
            Err(Error::KernelValidation(_))
        ));
    }

    #[test]
    fn division_polynomial_degrees() {
        let mut dp = DivisionPolynomials::new(Q::from_integer(2.into()), Q::from_integer(3.into()));
        assert_eq!(dp.get(3).degree(), Some(4));
        assert_eq!(dp.get(5).degree(), Some(12));
        assert_eq!(dp.get(7).degree(), Some(24));
        assert_eq!(dp.get(6).degree(), Some(16));
    }

    #[test]
    fn inverted_parameter() {
        // t² + 5t + 1 under t ↦ 49/t, times t²: 2401 + 245t + t²
        let h = qpoly(&[1, 5, 1]);
        assert_eq!(
            invert_parameter(&h, &Q::from_integer(49.into()), 2),
            qpoly(&[2401, 245, 1])
        );
    }

    #[test]
    fn all_singular_is_inconclusive() {
        let pair = IsogenyPair {
            f: qpoly(&[0]),
            g: qpoly(&[0]),
            f_prime: qpoly(&[0]),
            g_prime: qpoly(&[0]),
            ell: 2,
        };
        assert!(matches!(
            verify_isogeny(&pair, &[Q::one()], &[5]),
            Err(Error::Inconclusive(_))
        ));
    }
}
