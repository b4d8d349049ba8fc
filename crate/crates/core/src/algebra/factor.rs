//! Complete factorization of univariate polynomials over ℚ.
//!
//! Pipeline: content extraction → Yun squarefree decomposition → for each
//! squarefree part, factor modulo a well-chosen odd prime (Cantor–Zassenhaus),
//! Hensel-lift the modular factorization past twice the Mignotte bound, and
//! recombine subsets of lifted factors by trial division (Zassenhaus).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modp::{self, FpPoly};
use super::qpoly::{normalize, primitive_decomposition, qpoly_big, QPoly};
use super::rational::Q;
use crate::arith::is_prime_u64;
use crate::error::{Error, Result};

/// A polynomial written as `content · ∏ factorᵉ`.
///
/// Factors are irreducible, integral, primitive, with positive leading
/// coefficient, pairwise distinct, and sorted by degree then coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredPoly<F> {
    pub content: Q,
    pub factors: Vec<(F, u32)>,
}

impl FactoredPoly<QPoly> {
    /// Multiplies the factorization back out.
    pub fn expand(&self) -> QPoly {
        let mut acc = QPoly::constant(self.content.clone());
        for (f, e) in &self.factors {
            acc = &acc * &f.pow(*e);
        }
        acc
    }

    /// Multiplicity of a given irreducible factor (0 if absent).
    pub fn multiplicity_of(&self, f: &QPoly) -> u32 {
        let nf = normalize(f);
        self.factors
            .iter()
            .find(|(g, _)| *g == nf)
            .map_or(0, |(_, e)| *e)
    }
}

/// Deterministic ordering key: degree first, then coefficients from the
/// constant term upward.
pub(crate) fn factor_order(a: &QPoly, b: &QPoly) -> std::cmp::Ordering {
    a.degree()
        .cmp(&b.degree())
        .then_with(|| a.coeffs().cmp(b.coeffs()))
}

/// Factors a nonzero polynomial completely over ℚ.
pub fn poly_factor(p: &QPoly) -> Result<FactoredPoly<QPoly>> {
    if p.is_zero() {
        return Err(Error::Domain("cannot factor the zero polynomial".into()));
    }
    let pp = normalize(p);
    let mut factors: Vec<(QPoly, u32)> = Vec::new();
    for (sqf, mult) in yun(&pp) {
        for irr in factor_squarefree_primitive(&normalize(&sqf)) {
            factors.push((irr, mult));
        }
    }
    factors.sort_by(|a, b| factor_order(&a.0, &b.0));
    let mut prod = QPoly::one();
    for (f, e) in &factors {
        prod = &prod * &f.pow(*e);
    }
    let content = p.lc().expect("nonzero") / prod.lc().expect("nonzero");
    Ok(FactoredPoly { content, factors })
}

/// Yun's squarefree decomposition: pairs `(aᵢ, i)` with `p = c·∏ aᵢ^i`,
/// each `aᵢ` squarefree and non-constant.
pub fn yun(p: &QPoly) -> Vec<(QPoly, u32)> {
    let mut out = Vec::new();
    if p.is_constant() {
        return out;
    }
    let dp = p.derivative();
    let b = p.gcd(&dp);
    let mut c = p.exact_div(&b).expect("gcd divides");
    let mut d = &dp.exact_div(&b).expect("gcd divides") - &c.derivative();
    let mut i = 1;
    while !c.is_constant() {
        let a = c.gcd(&d);
        c = c.exact_div(&a).expect("gcd divides");
        d = &d.exact_div(&a).expect("gcd divides") - &c.derivative();
        if !a.is_constant() {
            out.push((a, i));
        }
        i += 1;
    }
    out
}

/// Irreducible factors of a squarefree, primitive integer polynomial with
/// positive leading coefficient.
fn factor_squarefree_primitive(f: &QPoly) -> Vec<QPoly> {
    let n = f.degree().expect("nonzero");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![f.clone()];
    }
    // Pull out the factor t separately (keeps the modular images cleaner).
    if f.coeff(0).is_zero() {
        let rest = f.exact_div(&QPoly::x()).expect("t divides");
        let mut out = vec![QPoly::x()];
        out.extend(factor_squarefree_primitive(&normalize(&rest)));
        return out;
    }
    let ints: Vec<BigInt> = primitive_decomposition(f).1;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);

    // Pick the prime (among the first few admissible ones) with the fewest
    // modular factors.
    let lc = ints.last().unwrap().clone();
    let mut best: Option<(u64, Vec<FpPoly>)> = None;
    let mut tried = 0;
    let mut p = 2u64;
    while tried < 6 {
        p += 1;
        if !is_prime_u64(p) || (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = modp::reduce_poly(&ints, p);
        if !modp::is_squarefree(&fp, p) {
            continue;
        }
        tried += 1;
        let fs = modp::factor_squarefree(&fp, p, &mut rng);
        if fs.len() == 1 {
            return vec![f.clone()];
        }
        if best.as_ref().map_or(true, |(_, b)| fs.len() < b.len()) {
            best = Some((p, fs));
        }
    }
    let (p, modular) = best.expect("some prime was admissible");

    // Coefficient bound for factors of lc·f: 2^n · ‖f‖₂ · |lc|.
    let norm2: BigInt = ints.iter().map(|c| c * c).sum::<BigInt>().sqrt() + 1u32;
    let bound: BigInt = (BigInt::one() << n) * norm2 * lc.abs() * 2u32;
    let mut k = 1u32;
    let pb = BigInt::from(p);
    let mut pk = pb.clone();
    while pk <= bound {
        pk *= &pb;
        k += 1;
    }
    let lifted = hensel_lift_all(&ints, &modular, p, k);
    recombine(&ints, lifted, &pk)
}

/// Symmetric residue in `(−m/2, m/2]`.
fn sym_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r * 2u32 > *m {
        r - m
    } else {
        r
    }
}

fn int_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn reduce_mod(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = a.iter().map(|c| c.mod_floor(m)).collect();
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn lift_fp(a: &[u64]) -> Vec<BigInt> {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

/// Lifts `F ≡ ∏ uᵢ (mod p)` (with `F = lc⁻¹·f` monic modulo `p^k`) to
/// monic factors modulo `p^k`.
fn hensel_lift_all(f: &[BigInt], modular: &[FpPoly], p: u64, k: u32) -> Vec<Vec<BigInt>> {
    let pk = BigInt::from(p).pow(k);
    let lc = f.last().unwrap();
    let lc_inv = lc
        .modinv(&pk)
        .expect("leading coefficient invertible modulo p");
    let target = reduce_mod(&f.iter().map(|c| c * &lc_inv).collect::<Vec<_>>(), &pk);
    lift_tree(&target, modular, p, k)
}

fn lift_tree(target: &[BigInt], modular: &[FpPoly], p: u64, k: u32) -> Vec<Vec<BigInt>> {
    if modular.len() == 1 {
        return vec![target.to_vec()];
    }
    let mid = modular.len() / 2;
    let g0 = modular[..mid]
        .iter()
        .fold(vec![1u64], |a, b| modp::mul(&a, b, p));
    let h0 = modular[mid..]
        .iter()
        .fold(vec![1u64], |a, b| modp::mul(&a, b, p));
    let (g, h) = hensel_two(target, &g0, &h0, p, k);
    let mut out = lift_tree(&g, &modular[..mid], p, k);
    out.extend(lift_tree(&h, &modular[mid..], p, k));
    out
}

/// Linear two-factor Hensel lifting of a monic `F ≡ g·h (mod p)` to `p^k`.
fn hensel_two(
    target: &[BigInt],
    g0: &[u64],
    h0: &[u64],
    p: u64,
    k: u32,
) -> (Vec<BigInt>, Vec<BigInt>) {
    let (one, s, t) = modp::xgcd(g0, h0, p);
    debug_assert_eq!(one, vec![1]);
    let pb = BigInt::from(p);
    let mut g = lift_fp(g0);
    let mut h = lift_fp(h0);
    let mut pj = pb.clone();
    for _ in 1..k {
        let gh = int_mul(&g, &h);
        let n = target.len().max(gh.len());
        let diff: Vec<BigInt> = (0..n)
            .map(|i| {
                target.get(i).cloned().unwrap_or_default() - gh.get(i).cloned().unwrap_or_default()
            })
            .collect();
        // The difference is divisible by p^j by construction.
        let e: FpPoly = {
            let v: Vec<BigInt> = diff.iter().map(|c| c / &pj).collect();
            modp::reduce_poly(&v, p)
        };
        if !e.is_empty() {
            let te = modp::mul(&t, &e, p);
            let (q, dg) = modp::divrem(&te, g0, p);
            let dh = modp::add(&modp::mul(&s, &e, p), &modp::mul(&q, h0, p), p);
            for (i, c) in dg.iter().enumerate() {
                g[i] += &pj * c;
            }
            if dh.len() > h.len() {
                h.resize(dh.len(), BigInt::zero());
            }
            for (i, c) in dh.iter().enumerate() {
                h[i] += &pj * c;
            }
        }
        pj *= &pb;
    }
    (reduce_mod(&g, &pj), reduce_mod(&h, &pj))
}

/// Subset recombination of lifted monic factors.
fn recombine(f: &[BigInt], mut lifted: Vec<Vec<BigInt>>, pk: &BigInt) -> Vec<QPoly> {
    let mut out = Vec::new();
    let mut rest = qpoly_big(f);
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut found = false;
        let lc = primitive_decomposition(&rest).1.last().unwrap().clone();
        for subset in combinations(lifted.len(), size) {
            let mut g = vec![lc.clone()];
            for &i in &subset {
                g = reduce_mod(&int_mul(&g, &lifted[i]), pk);
            }
            let cand: Vec<BigInt> = g.iter().map(|c| sym_mod(c, pk)).collect();
            let cand = normalize(&qpoly_big(&cand));
            if cand.is_constant() {
                continue;
            }
            if let Some(q) = rest.exact_div(&cand) {
                if q.coeffs().iter().all(|c| c.is_integer()) {
                    out.push(cand);
                    rest = normalize(&q);
                    for &i in subset.iter().rev() {
                        lifted.remove(i);
                    }
                    found = true;
                    break;
                }
            }
        }
        if !found {
            size += 1;
        }
    }
    if !rest.is_constant() {
        out.push(rest);
    }
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qpoly::qpoly;
    use crate::algebra::rational::q;

    #[test]
    fn difference_of_squares() {
        let f = poly_factor(&qpoly(&[-1, 0, 1])).unwrap();
        assert_eq!(f.content, q(1));
        assert_eq!(
            f.factors,
            vec![(qpoly(&[-1, 1]), 1), (qpoly(&[1, 1]), 1)]
        );
    }

    #[test]
    fn x4_plus_1_is_irreducible() {
        let f = poly_factor(&qpoly(&[1, 0, 0, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(qpoly(&[1, 0, 0, 0, 1]), 1)]);
    }

    #[test]
    fn swinnerton_dyer_like_recombination() {
        // (x²−2)(x²−3)(x²+x+1)·2, whose images split finely modulo small primes.
        let a = qpoly(&[-2, 0, 1]);
        let b = qpoly(&[-3, 0, 1]);
        let c = qpoly(&[1, 1, 1]);
        let p = (&(&a * &b) * &c).scale(&q(2));
        let f = poly_factor(&p).unwrap();
        assert_eq!(f.content, q(2));
        assert_eq!(f.factors.len(), 3);
        assert_eq!(f.expand(), p);
    }

    #[test]
    fn repeated_factors_and_content() {
        let p = (&qpoly(&[5, 1]) * &qpoly(&[9, 1]).pow(3)).scale(&q(27));
        let f = poly_factor(&p).unwrap();
        assert_eq!(f.content, q(27));
        assert_eq!(f.factors, vec![(qpoly(&[5, 1]), 1), (qpoly(&[9, 1]), 3)]);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(poly_factor(&QPoly::zero()).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }
}
