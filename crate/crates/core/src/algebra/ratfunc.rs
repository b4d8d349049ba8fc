//! The rational function field ℚ(t), as reduced fractions of [`QPoly`].
//!
//! `RatFunc` implements the `num-traits` field vocabulary, so
//! `UniPoly<RatFunc>` gives polynomials in `x` over ℚ(t) (division
//! polynomials, kernel polynomials) with the generic polynomial code.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::qpoly::{format_poly, QPoly};
use super::rational::Q;

/// A reduced fraction `num/den` with `den` monic.
#[derive(Clone, PartialEq, Debug)]
pub struct RatFunc {
    num: QPoly,
    den: QPoly,
}

impl RatFunc {
    /// Builds `num/den`, reducing and making the denominator monic.
    ///
    /// Panics if `den` is zero.
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator in rational function");
        if num.is_zero() {
            return RatFunc {
                num,
                den: QPoly::one(),
            };
        }
        let g = num.gcd(&den);
        let mut n = num.exact_div(&g).expect("gcd divides");
        let mut d = den.exact_div(&g).expect("gcd divides");
        let l = d.lc().expect("nonzero").clone();
        let inv = Q::one() / l;
        n = n.scale(&inv);
        d = d.scale(&inv);
        RatFunc { num: n, den: d }
    }

    /// A polynomial viewed as a rational function.
    pub fn from_poly(p: QPoly) -> Self {
        RatFunc {
            num: p,
            den: QPoly::one(),
        }
    }

    /// A constant.
    pub fn constant(c: Q) -> Self {
        Self::from_poly(QPoly::constant(c))
    }

    pub fn numer(&self) -> &QPoly {
        &self.num
    }

    pub fn denom(&self) -> &QPoly {
        &self.den
    }

    /// The polynomial, if the denominator is 1.
    pub fn as_poly(&self) -> Option<&QPoly> {
        self.den.is_constant().then_some(&self.num)
    }

    /// Value at a rational point (`None` at a pole).
    pub fn eval(&self, t: &Q) -> Option<Q> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", format_poly(&self.num, "t"))
        } else {
            write!(
                f,
                "({})/({})",
                format_poly(&self.num, "t"),
                format_poly(&self.den, "t")
            )
        }
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den);
        }
        RatFunc::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        self + (-o)
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        if self.den.is_constant() && o.den.is_constant() {
            return RatFunc::from_poly(&self.num * &o.num);
        }
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div for RatFunc {
    type Output = RatFunc;
    fn div(self, o: RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den,
        }
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::from_poly(QPoly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::from_poly(QPoly::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qpoly::qpoly;

    #[test]
    fn field_operations_reduce() {
        let a = RatFunc::new(qpoly(&[-1, 0, 1]), qpoly(&[-2, 2]));
        assert_eq!(a.numer(), &qpoly(&[1, 1]).scale(&Q::new(1.into(), 2.into())));
        assert_eq!(a.denom(), &QPoly::one());
        let b = RatFunc::new(qpoly(&[1]), qpoly(&[0, 1]));
        let c = a.clone() / b.clone();
        assert_eq!(c * b, a);
    }
}
