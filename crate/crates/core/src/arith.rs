//! Integer number theory: primality, factorization, Legendre symbols,
//! valuations, and square tests in ℚ and in real/imaginary quadratic fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::rational::{is_rational_square, Q};
use crate::error::{Error, Result};

/// Trial-division limit before switching to Pollard–Brent.
const TRIAL_LIMIT: u64 = 100_000;

/// `|n| = ∏ pᵉ` together with the sign of `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFactorization {
    /// `−1` or `+1`.
    pub sign: i8,
    /// `(prime, exponent)` with strictly increasing primes.
    pub factors: Vec<(BigInt, u32)>,
}

impl PrimeFactorization {
    /// Multiplies the factorization back out (sign included).
    pub fn product(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        acc
    }

    /// The primes, in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// All primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

#[inline]
fn mulmod64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod64(r, a, m);
        }
        a = mulmod64(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the first thirteen prime bases: deterministic below
/// 3.3·10²⁴, a strong probable-prime test above.
pub fn is_prime(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    if let Some(m) = n.to_u64() {
        return is_prime_u64(m);
    }
    const BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    for p in BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let nm1 = n - 1u32;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in BASES {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard–Brent on a 64-bit odd composite; returns a nontrivial factor.
fn brent_u64(n: u64, rng: &mut ChaCha8Rng) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    loop {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(0..n);
        let m = 128u64;
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let (mut x, mut ys) = (0u64, 0u64);
        let f = |v: u64| (mulmod64(v, v, n) + c) % n;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mulmod64(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
}

/// Pollard–Brent for big composites.
fn brent_big(n: &BigInt, rng: &mut ChaCha8Rng) -> BigInt {
    if n.is_even() {
        return BigInt::from(2);
    }
    let bits = n.bits();
    loop {
        let c = BigInt::from(rng.gen::<u64>()) % n + 1u32;
        let mut y = BigInt::from(rng.gen::<u64>()) % n;
        let m = 128u64;
        let (mut g, mut r, mut q) = (BigInt::one(), 1u64, BigInt::one());
        let (mut x, mut ys) = (BigInt::zero(), BigInt::zero());
        let f = |v: &BigInt| (v * v + &c) % n;
        let mut steps = 0u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
            steps += r;
            if steps > (1u64 << (bits / 4 + 8).min(40)) {
                break;
            }
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && &g != n {
            return g;
        }
    }
}

fn push_factor(out: &mut Vec<(BigInt, u32)>, p: BigInt, e: u32) {
    if let Some(slot) = out.iter_mut().find(|(q, _)| *q == p) {
        slot.1 += e;
    } else {
        out.push((p, e));
    }
}

fn split_rest(n: BigInt, rng: &mut ChaCha8Rng, out: &mut Vec<(BigInt, u32)>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        push_factor(out, n, 1);
        return;
    }
    let d = match n.to_u64() {
        Some(m) => BigInt::from(brent_u64(m, rng)),
        None => brent_big(&n, rng),
    };
    let other = &n / &d;
    split_rest(d, rng, out);
    split_rest(other, rng, out);
}

/// Complete factorization of a nonzero integer with a fixed internal seed.
pub fn factor_integer(n: &BigInt) -> Result<PrimeFactorization> {
    factor_integer_seeded(n, 0x00c0_ffee)
}

/// Complete factorization; the Pollard–Brent stage is seeded from `seed`.
pub fn factor_integer_seeded(n: &BigInt, seed: u64) -> Result<PrimeFactorization> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if let Some(small) = m.to_u64() {
        for (p, e) in factor_u64(small) {
            out.push((BigInt::from(p), e));
        }
        return Ok(PrimeFactorization { sign, factors: out });
    }
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        if (&m % &pb).is_zero() {
            let mut e = 0;
            while (&m % &pb).is_zero() {
                m /= &pb;
                e += 1;
            }
            out.push((pb, e));
        }
        if let Some(small) = m.to_u64() {
            for (q, e) in factor_u64(small) {
                push_factor(&mut out, BigInt::from(q), e);
            }
            m = BigInt::one();
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    split_rest(m, &mut rng, &mut out);
    out.sort();
    Ok(PrimeFactorization { sign, factors: out })
}

/// Factorization of a positive 64-bit integer (empty for `n = 1`).
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5, 7] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut p = 11u64;
    // Trial division up to the cube root is cheap for the sizes at hand.
    while p * p <= n && p < 2000 {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 2;
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut rng = ChaCha8Rng::seed_from_u64(n);
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u64(m) {
                match out.iter_mut().find(|(q, _)| *q == m) {
                    Some(slot) => slot.1 += 1,
                    None => out.push((m, 1)),
                }
                continue;
            }
            let r = integer_sqrt_u64(m);
            if r * r == m {
                stack.push(r);
                stack.push(r);
                continue;
            }
            let d = brent_u64(m, &mut rng);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort_unstable();
    out
}

fn integer_sqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Jacobi symbol `(a | n)` for odd positive `n`, by quadratic reciprocity.
pub fn jacobi_u64(a: u64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol `(a | p)` for an odd prime `p`, with `a` any integer.
pub fn legendre(a: &BigInt, p: u64) -> Result<i8> {
    if p < 3 || !is_prime_u64(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    Ok(legendre_unchecked(a, p))
}

/// Legendre symbol without validating `p` (hot loops).
#[inline]
pub fn legendre_unchecked(a: &BigInt, p: u64) -> i8 {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits");
    jacobi_u64(r, p)
}

/// Legendre symbol of a machine integer.
#[inline]
pub fn legendre_i128(a: i128, p: u64) -> i8 {
    jacobi_u64(a.rem_euclid(p as i128) as u64, p)
}

/// `v_p(n)` for nonzero `n` (`u32::MAX` for zero).
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p` of a nonzero rational.
pub fn valuation_q(x: &Q, p: u64) -> i64 {
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Whether a nonzero integer is squarefree.
pub fn is_squarefree(n: &BigInt) -> Result<bool> {
    Ok(factor_integer(n)?.factors.iter().all(|(_, e)| *e == 1))
}

/// Whether `z = a + b√d` is a square in ℚ(√d).
///
/// With `z = (u + v√d)²` one needs `u² + dv² = a`, `2uv = b`.  For `b = 0`
/// this means `a` or `a/d` is a rational square; otherwise the norm
/// `a² − db²` must be a rational square `n²` and `u² = (a ± n)/2` must be a
/// nonzero rational square for one choice of sign.
pub fn is_square_in_quadratic_field(d: &BigInt, a: &Q, b: &Q) -> Result<bool> {
    if d.is_zero() || d.is_one() || !is_squarefree(d)? {
        return Err(Error::Domain(format!("{d} is not a squarefree integer ≠ 0, 1")));
    }
    let dq = Q::from_integer(d.clone());
    if b.is_zero() {
        return Ok(is_rational_square(a) || is_rational_square(&(a / &dq)));
    }
    let norm = a * a - &dq * b * b;
    let Some(n) = crate::algebra::rational::rational_sqrt(&norm) else {
        return Ok(false);
    };
    let two = Q::from_integer(BigInt::from(2));
    for u2 in [(a + &n) / &two, (a - &n) / &two] {
        if !u2.is_zero() && is_rational_square(&u2) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{q, qf};

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(&BigInt::from(0), 7).unwrap(), 0);
        assert_eq!(legendre(&BigInt::from(6), 31).unwrap(), -1);
        assert_eq!(legendre(&BigInt::from(12), 11).unwrap(), 1);
        assert_eq!(legendre(&BigInt::from(-1), 13).unwrap(), 1);
        assert!(legendre(&BigInt::from(3), 9).is_err());
        assert!(legendre(&BigInt::from(3), 2).is_err());
    }

    #[test]
    fn factor_examples() {
        let f = factor_integer(&BigInt::from(1496537856u64)).unwrap();
        assert_eq!(
            f.factors,
            vec![
                (BigInt::from(2), 8),
                (BigInt::from(3), 12),
                (BigInt::from(11), 1)
            ]
        );
        let f = factor_integer(&BigInt::from(-12)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, vec![(BigInt::from(2), 2), (BigInt::from(3), 1)]);
        let p = BigInt::from(1_000_000_007u64);
        assert_eq!(factor_integer(&p).unwrap().factors, vec![(p, 1)]);
        assert!(factor_integer(&BigInt::zero()).is_err());
    }

    #[test]
    fn factor_large_semiprime() {
        let a = BigInt::from(1_000_000_007u64);
        let b = BigInt::from(998_244_353u64);
        let c = BigInt::from(1_000_000_009u64);
        let n = &a * &b * &c;
        let f = factor_integer(&n).unwrap();
        assert_eq!(f.product(), n);
        assert_eq!(f.factors.len(), 3);
    }

    #[test]
    fn quadratic_square_examples() {
        assert!(is_square_in_quadratic_field(&BigInt::from(2), &q(3), &q(2)).unwrap());
        assert!(!is_square_in_quadratic_field(&BigInt::from(3), &q(2), &q(0)).unwrap());
        assert!(is_square_in_quadratic_field(&BigInt::from(3), &q(3), &q(0)).unwrap());
        assert!(is_square_in_quadratic_field(&BigInt::from(4), &q(1), &q(1)).is_err());
        // (1/2 + √5/2)² = 3/2 + √5/2
        assert!(is_square_in_quadratic_field(&BigInt::from(5), &qf(3, 2), &qf(1, 2)).unwrap());
    }

    #[test]
    fn sieve_and_primality_agree() {
        let ps = primes_up_to(1000);
        assert_eq!(ps.len(), 168);
        for n in 0..1000u64 {
            assert_eq!(ps.binary_search(&n).is_ok(), is_prime_u64(n));
        }
    }
}
