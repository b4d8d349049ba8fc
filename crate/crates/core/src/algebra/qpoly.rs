//! Polynomials over ℚ: normalization, gcd/resultant with domain checks,
//! integer views and JSON/text serialization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::UniPoly;
use super::rational::{denom_lcm, fmt_q, parse_q, qi, Q};
use crate::error::{Error, Result};

/// Univariate polynomial with exact rational coefficients.
pub type QPoly = UniPoly<Q>;

/// Polynomial from machine-integer coefficients (lowest degree first).
pub fn qpoly(coeffs: &[i64]) -> QPoly {
    UniPoly::new(coeffs.iter().map(|&c| qi(&BigInt::from(c))).collect())
}

/// Polynomial from big-integer coefficients.
pub fn qpoly_big(coeffs: &[BigInt]) -> QPoly {
    UniPoly::new(coeffs.iter().map(qi).collect())
}

/// Integer coefficients if every coefficient is integral.
pub fn int_coeffs(p: &QPoly) -> Option<Vec<BigInt>> {
    p.coeffs()
        .iter()
        .map(|c| c.is_integer().then(|| c.numer().clone()))
        .collect()
}

/// Splits `p = c · pp` with `pp` integral, primitive, positive leading
/// coefficient.  Returns `(c, pp)`; the zero polynomial gives `(0, [])`.
pub fn primitive_decomposition(p: &QPoly) -> (Q, Vec<BigInt>) {
    if p.is_zero() {
        return (Q::zero(), Vec::new());
    }
    let l = denom_lcm(p.coeffs());
    let ints: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|c| (c * qi(&l)).to_integer())
        .collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if ints.last().expect("nonzero").is_negative() {
        g = -g;
    }
    let pp: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
    (Q::new(g, l), pp)
}

/// The primitive integer associate with positive leading coefficient.
pub fn normalize(p: &QPoly) -> QPoly {
    qpoly_big(&primitive_decomposition(p).1)
}

/// The rational content `c` in `p = c · normalize(p)` (sign included).
pub fn content(p: &QPoly) -> Q {
    primitive_decomposition(p).0
}

/// Greatest common divisor, normalized to integer coefficients with positive
/// leading coefficient and content one.
pub fn poly_gcd(p: &QPoly, q: &QPoly) -> Result<QPoly> {
    if p.is_zero() && q.is_zero() {
        return Err(Error::Domain("gcd of two zero polynomials".into()));
    }
    Ok(normalize(&p.gcd(q)))
}

/// Exact resultant of two nonzero polynomials.
///
/// Sign convention: `Res(p, q) = lc(q)^{deg p} · ∏_{q(β)=0} p(β)`, i.e. the
/// Sylvester determinant with coefficients listed lowest degree first.  It
/// differs from `UniPoly::resultant` by `(−1)^{deg p · deg q}`; only the
/// vanishing and the prime support of resultants matter downstream.
pub fn poly_resultant(p: &QPoly, q: &QPoly) -> Result<Q> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::Domain("resultant with the zero polynomial".into()));
    }
    Ok(q.resultant(p))
}

/// Squarefree part (product of distinct irreducible factors), normalized.
pub fn squarefree_part(p: &QPoly) -> QPoly {
    if p.is_constant() {
        return QPoly::one();
    }
    let g = p.gcd(&p.derivative());
    normalize(&p.exact_div(&g).expect("gcd divides"))
}

/// Multiplicity of `q` (non-constant) as a divisor of nonzero `p`.
pub fn poly_multiplicity(p: &QPoly, q: &QPoly) -> u32 {
    let mut e = 0;
    let mut cur = p.clone();
    if q.is_constant() || p.is_zero() {
        return 0;
    }
    while let Some(next) = cur.exact_div(q) {
        cur = next;
        e += 1;
    }
    e
}

/// Number of distinct real roots, by a Sturm sequence.
pub fn count_real_roots(p: &QPoly) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let mut seq = vec![squarefree_part(p)];
    seq.push(seq[0].derivative());
    while !seq.last().expect("nonempty").is_zero() {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1]).expect("nonzero divisor");
        seq.push(-r);
    }
    seq.pop();
    // Signs at ±∞ come from leading coefficients and degree parity.
    let changes = |at_neg: bool| {
        let signs: Vec<bool> = seq
            .iter()
            .map(|q| {
                let pos = q.lc().expect("nonzero").is_positive();
                let odd = q.degree().unwrap_or(0) % 2 == 1;
                if at_neg && odd {
                    !pos
                } else {
                    pos
                }
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(true) - changes(false)
}

/// JSON array of coefficient strings, lowest degree first.
pub fn poly_to_json(p: &QPoly) -> serde_json::Value {
    serde_json::Value::Array(
        p.coeffs()
            .iter()
            .map(|c| serde_json::Value::String(fmt_q(c)))
            .collect(),
    )
}

/// Parses a JSON array of coefficient strings (integers also accepted).
pub fn poly_from_json(v: &serde_json::Value) -> Result<QPoly> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("polynomial must be a JSON array".into()))?;
    let coeffs = arr
        .iter()
        .map(|c| match c {
            serde_json::Value::String(s) => parse_q(s),
            serde_json::Value::Number(n) => parse_q(&n.to_string()),
            _ => Err(Error::Parse(format!("bad coefficient {c}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniPoly::new(coeffs))
}

/// Human-readable form, highest degree first, e.g. `27*t^2 - 3*t + 1`.
pub fn format_poly(p: &QPoly, var: &str) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        if i == 0 {
            out.push_str(&fmt_q(&a));
        } else if a.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{}*{}", fmt_q(&a), mono));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{q, qf};

    #[test]
    fn gcd_examples() {
        let a = qpoly(&[-1, 0, 1]);
        let b = qpoly(&[-1, 1]);
        assert_eq!(poly_gcd(&a, &b).unwrap(), b);
        assert_eq!(poly_gcd(&a.scale(&q(-6)), &QPoly::zero()).unwrap(), a);
        assert!(poly_gcd(&QPoly::zero(), &QPoly::zero()).is_err());
    }

    #[test]
    fn resultant_examples() {
        assert_eq!(poly_resultant(&qpoly(&[-1, 1]), &qpoly(&[1, 1])).unwrap(), q(-2));
        assert_eq!(poly_resultant(&qpoly(&[-1, 0, 1]), &qpoly(&[-1, 1])).unwrap(), q(0));
        assert_eq!(poly_resultant(&qpoly(&[0, 1]), &qpoly(&[-7, 1])).unwrap(), q(7));
        assert!(poly_resultant(&qpoly(&[1]), &QPoly::zero()).is_err());
    }

    #[test]
    fn primitive_parts() {
        let p = UniPoly::new(vec![qf(-3, 2), qf(-9, 4)]);
        let (c, pp) = primitive_decomposition(&p);
        assert_eq!(c, qf(-3, 4));
        assert_eq!(pp, vec![BigInt::from(2), BigInt::from(3)]);
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(count_real_roots(&qpoly(&[-1, 0, 1])), 2);
        assert_eq!(count_real_roots(&qpoly(&[1, 0, 1])), 0);
        assert_eq!(count_real_roots(&qpoly(&[0, -1, 0, 1]).pow(2)), 3);
        assert_eq!(count_real_roots(&qpoly(&[49, 13, 1])), 0);
        assert_eq!(count_real_roots(&qpoly(&[5])), 0);
    }

    #[test]
    fn json_round_trip() {
        let p = UniPoly::new(vec![qf(1, 3), q(0), q(-5)]);
        let v = poly_to_json(&p);
        assert_eq!(v.to_string(), r#"["1/3","0","-5"]"#);
        assert_eq!(poly_from_json(&v).unwrap(), p);
        assert_eq!(format_poly(&p, "t"), "-5*t^2 + 1/3");
    }
}
