//! Dense polynomials over a prime field 𝔽_p with machine-word coefficients.
//!
//! Used for the modular stage of factorization over ℚ and for counting roots
//! of discriminant factors modulo many primes.  Coefficients are `u64`
//! residues in `[0, p)`, lowest degree first, trailing zeros trimmed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

/// Polynomial over 𝔽_p, coefficients lowest degree first.
pub type FpPoly = Vec<u64>;

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

/// `a^e mod p`.
pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse modulo a prime (`a ≢ 0`).
pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Reduces a big integer into `[0, p)`.
pub fn reduce_big(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

/// Reduces an integer polynomial modulo `p`.
pub fn reduce_poly(coeffs: &[BigInt], p: u64) -> FpPoly {
    let mut v: FpPoly = coeffs.iter().map(|c| reduce_big(c, p)).collect();
    trim(&mut v);
    v
}

pub fn trim(v: &mut FpPoly) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub fn degree(f: &[u64]) -> Option<usize> {
    f.len().checked_sub(1)
}

pub fn add(f: &[u64], g: &[u64], p: u64) -> FpPoly {
    let n = f.len().max(g.len());
    let mut v: FpPoly = (0..n)
        .map(|i| add_mod(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0), p))
        .collect();
    trim(&mut v);
    v
}

pub fn sub(f: &[u64], g: &[u64], p: u64) -> FpPoly {
    let n = f.len().max(g.len());
    let mut v: FpPoly = (0..n)
        .map(|i| sub_mod(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0), p))
        .collect();
    trim(&mut v);
    v
}

pub fn mul(f: &[u64], g: &[u64], p: u64) -> FpPoly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; f.len() + g.len() - 1];
    let pp = p as u128;
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + a as u128 * b as u128) % pp;
        }
    }
    let mut v: FpPoly = out.into_iter().map(|c| c as u64).collect();
    trim(&mut v);
    v
}

pub fn scale(f: &[u64], c: u64, p: u64) -> FpPoly {
    let mut v: FpPoly = f.iter().map(|&a| mul_mod(a, c, p)).collect();
    trim(&mut v);
    v
}

/// Euclidean division `f = q·g + r`; `g` must be nonzero.
pub fn divrem(f: &[u64], g: &[u64], p: u64) -> (FpPoly, FpPoly) {
    let dg = degree(g).expect("division by zero polynomial");
    let mut r = f.to_vec();
    if r.len() <= dg {
        return (Vec::new(), r);
    }
    let inv = inv_mod(g[dg], p);
    let mut q = vec![0u64; r.len() - dg];
    for k in (0..q.len()).rev() {
        let c = mul_mod(r[k + dg], inv, p);
        if c == 0 {
            continue;
        }
        for (j, &gj) in g.iter().enumerate() {
            r[k + j] = sub_mod(r[k + j], mul_mod(c, gj, p), p);
        }
        q[k] = c;
    }
    r.truncate(dg);
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

pub fn rem(f: &[u64], g: &[u64], p: u64) -> FpPoly {
    divrem(f, g, p).1
}

pub fn monic(f: &[u64], p: u64) -> FpPoly {
    match f.last() {
        None => Vec::new(),
        Some(&c) => scale(f, inv_mod(c, p), p),
    }
}

/// Monic gcd.
pub fn gcd(f: &[u64], g: &[u64], p: u64) -> FpPoly {
    let (mut a, mut b) = (f.to_vec(), g.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(&a, p)
}

/// Extended gcd: returns `(g, s, t)` with `s·f + t·h = g`, `g` monic.
pub fn xgcd(f: &[u64], h: &[u64], p: u64) -> (FpPoly, FpPoly, FpPoly) {
    let (mut r0, mut r1) = (f.to_vec(), h.to_vec());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let c = inv_mod(*r0.last().expect("not both zero"), p);
    (scale(&r0, c, p), scale(&s0, c, p), scale(&t0, c, p))
}

pub fn derivative(f: &[u64], p: u64) -> FpPoly {
    let mut v: FpPoly = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
        .collect();
    trim(&mut v);
    v
}

/// `base^e mod m` in 𝔽_p[x].
pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> FpPoly {
    let mut r = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = rem(&mul(&r, &b, p), m, p);
        }
        e >>= 1;
        if e > 0 {
            b = rem(&mul(&b, &b, p), m, p);
        }
    }
    r
}

/// Evaluates `f` at `x`.
pub fn eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| add_mod(mul_mod(acc, x, p), c, p))
}

/// Whether `f` (nonzero) is squarefree over 𝔽_p.
pub fn is_squarefree(f: &[u64], p: u64) -> bool {
    let d = derivative(f, p);
    if d.is_empty() {
        return degree(f) == Some(0);
    }
    degree(&gcd(f, &d, p)) == Some(0)
}

/// Distinct-degree factorization of a monic squarefree `f`:
/// pairs `(d, product of all degree-d irreducible factors)`.
pub fn distinct_degree(f: &[u64], p: u64) -> Vec<(usize, FpPoly)> {
    let mut out = Vec::new();
    let mut rest = monic(f, p);
    let x: FpPoly = vec![0, 1];
    let mut h = x.clone();
    let mut d = 0;
    while degree(&rest).unwrap_or(0) >= 2 * (d + 1) {
        d += 1;
        h = powmod(&h, p, &rest, p);
        let g = gcd(&rest, &sub(&h, &x, p), p);
        if degree(&g).unwrap_or(0) > 0 {
            out.push((d, g.clone()));
            rest = divrem(&rest, &g, p).0;
            h = rem(&h, &rest, p);
        }
    }
    if degree(&rest).unwrap_or(0) > 0 {
        let dr = degree(&rest).unwrap();
        out.push((dr, rest));
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting (odd `p`): `f` monic squarefree,
/// product of irreducibles of degree `d`.  Returns the monic factors.
pub fn equal_degree<R: Rng>(f: &[u64], d: usize, p: u64, rng: &mut R) -> Vec<FpPoly> {
    let n = degree(f).expect("nonzero");
    if n == d {
        return vec![monic(f, p)];
    }
    assert!(p % 2 == 1, "equal-degree splitting needs an odd prime");
    // exponent (p^d − 1)/2 as a big number is handled by repeated powering.
    loop {
        let a: FpPoly = {
            let mut v: FpPoly = (0..n).map(|_| rng.gen_range(0..p)).collect();
            trim(&mut v);
            v
        };
        if degree(&a).unwrap_or(0) == 0 {
            continue;
        }
        let g0 = gcd(&a, f, p);
        let g = if degree(&g0).unwrap_or(0) > 0 {
            g0
        } else {
            // a^{(p^d−1)/2} = (a^{p^{d−1}} · … · a^{p} · a)^{(p−1)/2}
            let mut acc = rem(&a, f, p);
            let mut cur = acc.clone();
            for _ in 1..d {
                cur = powmod(&cur, p, f, p);
                acc = rem(&mul(&acc, &cur, p), f, p);
            }
            let b = powmod(&acc, (p - 1) / 2, f, p);
            gcd(&sub(&b, &[1], p), f, p)
        };
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let h = divrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&monic(&h, p), d, p, rng));
            return out;
        }
    }
}

/// All monic irreducible factors of a squarefree `f` over 𝔽_p (odd `p`),
/// sorted by degree then coefficients.
pub fn factor_squarefree<R: Rng>(f: &[u64], p: u64, rng: &mut R) -> Vec<FpPoly> {
    let mut out = Vec::new();
    for (d, g) in distinct_degree(f, p) {
        out.extend(equal_degree(&g, d, p, rng));
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Distinct roots of a nonzero `f` in 𝔽_p, ascending.
pub fn roots<R: Rng>(f: &[u64], p: u64, rng: &mut R) -> Vec<u64> {
    if f.is_empty() {
        return Vec::new();
    }
    if p < 64 {
        return (0..p).filter(|&x| eval(f, x, p) == 0).collect();
    }
    let fm = monic(f, p);
    let xp = powmod(&[0, 1], p, &fm, p);
    let g = gcd(&fm, &sub(&xp, &[0, 1], p), p);
    if degree(&g).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let mut r: Vec<u64> = equal_degree(&g, 1, p, rng)
        .into_iter()
        .map(|lin| sub_mod(0, lin[0], p))
        .collect();
    r.sort_unstable();
    r
}

/// Number of distinct roots of `f` in 𝔽_p, without splitting.
pub fn count_roots(f: &[u64], p: u64) -> usize {
    if f.is_empty() {
        return p as usize;
    }
    if p < 64 {
        return (0..p).filter(|&x| eval(f, x, p) == 0).count();
    }
    let fm = monic(f, p);
    let xp = powmod(&[0, 1], p, &fm, p);
    degree(&gcd(&fm, &sub(&xp, &[0, 1], p), p)).unwrap_or(0)
}

/// Whether `x` is zero in 𝔽_p after reduction.
pub fn big_is_zero_mod(x: &BigInt, p: u64) -> bool {
    (x % BigInt::from(p)).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factor_x4_plus_1_mod_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = vec![1, 0, 0, 0, 1];
        // p ≡ 1 mod 8 splits completely; p ≡ 3 mod 8 into two quadratics.
        assert_eq!(factor_squarefree(&f, 17, &mut rng).len(), 4);
        assert_eq!(factor_squarefree(&f, 11, &mut rng).len(), 2);
        let fs = factor_squarefree(&f, 41, &mut rng);
        let prod = fs.iter().fold(vec![1u64], |a, b| mul(&a, b, 41));
        assert_eq!(prod, f);
    }

    #[test]
    fn roots_of_split_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // (x−3)(x−10) mod 101
        let f = mul(&[98, 1], &[91, 1], 101);
        assert_eq!(roots(&f, 101, &mut rng), vec![3, 10]);
        assert_eq!(count_roots(&f, 101), 2);
        assert!(roots(&[1, 0, 1], 103, &mut rng).is_empty());
    }

    #[test]
    fn xgcd_bezout() {
        let p = 13;
        let f = vec![1, 2, 1];
        let h = vec![3, 1];
        let (g, s, t) = xgcd(&f, &h, p);
        assert_eq!(g, vec![1]);
        assert_eq!(add(&mul(&s, &f, p), &mul(&t, &h, p), p), vec![1]);
    }
}
