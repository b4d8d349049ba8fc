//! Dense univariate polynomials over a generic coefficient ring.
//!
//! The coefficient type only needs the `num-traits` ring vocabulary
//! ([`Scalar`]); division-based algorithms additionally need a field
//! ([`Field`]).  The same code therefore serves exact rationals, rational
//! functions and `f32`/`f64` (used for numeric bracketing only).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// Ring-like coefficient: everything a polynomial needs for `+`, `-`, `*`.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// A [`Scalar`] with exact (or, for floats, approximate) division.
pub trait Field: Scalar + Div<Output = Self> {}

impl<T> Field for T where T: Scalar + Div<Output = T> {}

/// The integer `n` embedded in a ring, by binary doubling.
pub fn embed_nat<T: Scalar>(mut n: usize) -> T {
    let mut acc = T::zero();
    let mut base = T::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        n >>= 1;
    }
    acc
}

/// Dense polynomial `c₀ + c₁t + … + c_d t^d`, coefficients lowest degree first.
///
/// The coefficient vector never ends in a zero, so the zero polynomial is the
/// empty vector and its degree is the sentinel `None` (never `-1`).
#[derive(Clone, PartialEq, Debug)]
pub struct UniPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UniPoly<T> {
    /// Builds a polynomial from coefficients (lowest degree first), trimming
    /// trailing zeros.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// A constant polynomial.
    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c·t^k`.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k];
        v.push(c);
        Self::new(v)
    }

    /// The indeterminate `t`.
    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    /// Coefficients, lowest degree first.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Consumes the polynomial, returning its coefficient vector.
    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `t^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Whether this is a nonzero constant or zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Leading coefficient (`None` for zero).
    pub fn lc(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * embed_nat::<T>(i))
                .collect(),
        )
    }

    /// `self^e` by repeated squaring.
    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `t ↦ q(t)`.
    pub fn compose(&self, q: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &Self::constant(c.clone());
        }
        acc
    }

    /// Applies `f` to every coefficient.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> UniPoly<U> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }

    /// Division by a monic polynomial; works over any ring.
    ///
    /// Returns `None` when `d` is zero or not monic.
    pub fn divrem_monic(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        if !d.lc()?.is_one() {
            return None;
        }
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - c.clone() * dj.clone();
            }
            q[k] = c;
        }
        r.truncate(dd);
        Some((Self::new(q), Self::new(r)))
    }
}

impl<T: Field> UniPoly<T> {
    /// Euclidean division; `None` when dividing by zero.
    pub fn divrem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let inv = T::one() / d.lc()?.clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() * inv.clone();
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - c.clone() * dj.clone();
            }
            q[k] = c;
        }
        r.truncate(dd);
        Some((Self::new(q), Self::new(r)))
    }

    /// Remainder of Euclidean division.
    pub fn rem(&self, d: &Self) -> Option<Self> {
        self.divrem(d).map(|(_, r)| r)
    }

    /// Exact quotient; `None` if `d` is zero or does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d)?;
        r.is_zero().then_some(q)
    }

    /// The monic associate (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.lc() {
            None => Self::zero(),
            Some(c) => {
                let inv = T::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Resultant via the Euclidean remainder sequence.
    ///
    /// Uses `Res(a,b) = (−1)^{deg a·deg b} lc(b)^{deg a − deg r} Res(b, r)`
    /// with `r = a mod b`; returns zero when either input is zero.
    pub fn resultant(&self, other: &Self) -> T {
        let (mut a, mut b) = (self.clone(), other.clone());
        let mut acc = T::one();
        loop {
            let (da, db) = match (a.degree(), b.degree()) {
                (Some(x), Some(y)) => (x, y),
                _ => return T::zero(),
            };
            if db == 0 {
                let mut p = T::one();
                for _ in 0..da {
                    p = p * b.coeffs[0].clone();
                }
                return acc * p;
            }
            let r = a.rem(&b).expect("nonzero divisor");
            let dr = match r.degree() {
                None => return T::zero(),
                Some(d) => d,
            };
            if (da * db) % 2 == 1 {
                acc = -acc;
            }
            let lb = b.lc().expect("nonzero").clone();
            for _ in 0..(da - dr) {
                acc = acc * lb.clone();
            }
            a = b;
            b = r;
        }
    }
}

impl<T: Scalar> Add for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn add(self, rhs: Self) -> UniPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn sub(self, rhs: Self) -> UniPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn mul(self, rhs: Self) -> UniPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UniPoly::new(out)
    }
}

impl<T: Scalar> Neg for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn neg(self) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for UniPoly<T> {
            type Output = UniPoly<T>;
            fn $m(self, rhs: Self) -> UniPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for UniPoly<T> {
    type Output = UniPoly<T>;
    fn neg(self) -> UniPoly<T> {
        -(&self)
    }
}

impl<T: Scalar> Zero for UniPoly<T> {
    fn zero() -> Self {
        UniPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Scalar> One for UniPoly<T> {
    fn one() -> Self {
        UniPoly::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> UniPoly<f64> {
        UniPoly::new(v.to_vec())
    }

    #[test]
    fn trims_and_degree_sentinel() {
        assert_eq!(p(&[1.0, 0.0, 0.0]).degree(), Some(0));
        assert_eq!(p(&[0.0]).degree(), None);
        assert!(UniPoly::<f64>::zero().is_zero());
    }

    #[test]
    fn float_arithmetic_is_generic() {
        let a = p(&[1.0, 1.0]);
        let b = &a * &a;
        assert_eq!(b, p(&[1.0, 2.0, 1.0]));
        let (q, r) = b.divrem(&a).unwrap();
        assert_eq!(q, a);
        assert!(r.is_zero());
        assert_eq!(b.eval(&2.0), 9.0);
        assert_eq!(b.derivative(), p(&[2.0, 2.0]));
        let c: UniPoly<f32> = UniPoly::new(vec![0.5f32, 2.0]);
        assert_eq!(c.eval(&1.0), 2.5);
    }

    #[test]
    fn monic_division_over_integers() {
        let a: UniPoly<i64> = UniPoly::new(vec![-1, 0, 1]);
        let d: UniPoly<i64> = UniPoly::new(vec![-1, 1]);
        let (q, r) = a.divrem_monic(&d).unwrap();
        assert_eq!(q, UniPoly::new(vec![1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn compose_and_pow() {
        let a = p(&[0.0, 1.0, 1.0]);
        let sh = p(&[1.0, 1.0]);
        assert_eq!(a.compose(&sh), p(&[2.0, 3.0, 1.0]));
        assert_eq!(sh.pow(3), p(&[1.0, 3.0, 3.0, 1.0]));
    }
}
