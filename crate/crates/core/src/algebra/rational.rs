//! Exact rational helpers on top of `num-rational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

/// Rational from a machine integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational `n/d` from machine integers (`d ≠ 0`).
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from a big integer.
pub fn qi(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

/// Parses `"n"` or `"n/d"` (decimal, optional sign).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => Ok(qi(&s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
    }
}

/// Canonical text form: `"n"` for integers, `"n/d"` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact integer square root when `n` is a perfect square.
pub fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Whether a rational is the square of a rational.
pub fn is_rational_square(x: &Q) -> bool {
    x.is_zero() || (int_sqrt_exact(x.numer()).is_some() && int_sqrt_exact(x.denom()).is_some())
}

/// Exact square root of a rational square.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    let n = int_sqrt_exact(x.numer())?;
    let d = int_sqrt_exact(x.denom())?;
    Some(Q::new(n, d))
}

/// Least common multiple of the denominators of a list of rationals.
pub fn denom_lcm<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Rational to `f64` (lossy, for reporting only).
pub fn q_to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Very large numerator/denominator: scale through logarithms.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// `|x|` for rationals, returned as a new value.
pub fn q_abs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "-7", "3/4", "-10/6"] {
            let x = parse_q(s).unwrap();
            assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
        }
        assert_eq!(fmt_q(&parse_q("-10/6").unwrap()), "-5/3");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn rational_squares() {
        assert!(is_rational_square(&qf(9, 4)));
        assert!(!is_rational_square(&qf(2, 1)));
        assert!(!is_rational_square(&q(-4)));
        assert_eq!(rational_sqrt(&qf(49, 25)), Some(qf(7, 5)));
    }
}
