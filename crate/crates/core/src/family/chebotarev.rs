//! Empirical Chebotarev estimates: how often a polynomial `h` has a root
//! mod `p`, and how often such a root also makes `6g(t)` a quadratic residue.

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::modp::{self, reduce_big};
use crate::algebra::qpoly::{primitive_decomposition, QPoly};
use crate::algebra::rational::{denom_lcm, qi};
use crate::arith::{jacobi_u64, primes_up_to};
use crate::error::{Error, Result};

/// Root counts of `h` at one prime.
#[derive(Clone, Copy, Debug)]
struct PrimeCounts {
    p: u64,
    roots: u32,
    qr_roots: u32,
}

/// Integer coefficients of `h` (primitive) and of `d²·g` for the common
/// denominator `d` of `g` (a square factor does not change residue symbols).
fn integer_data(h: &QPoly, g: &QPoly) -> (Vec<BigInt>, Vec<BigInt>, BigInt) {
    let (_, hi) = primitive_decomposition(h);
    let d = denom_lcm(g.coeffs());
    let d2 = qi(&(&d * &d));
    let gi: Vec<BigInt> = g
        .coeffs()
        .iter()
        .map(|c| (c * &d2).to_integer() * 6)
        .collect();
    (hi, gi, d)
}

fn counts_at(h: &[BigInt], g6: &[BigInt], p: u64) -> PrimeCounts {
    let hp = modp::reduce_poly(h, p);
    let gp = modp::reduce_poly(g6, p);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let rs = modp::roots(&hp, p, &mut rng);
    let qr = rs
        .iter()
        .filter(|&&t| jacobi_u64(modp::eval(&gp, t, p), p) == 1)
        .count();
    PrimeCounts {
        p,
        roots: rs.len() as u32,
        qr_roots: qr as u32,
    }
}

/// Primes `5 ≤ p ≤ x` not dividing the leading coefficient of `h` nor the
/// denominator of `g`, with their root counts (computed in parallel; the
/// order of the result is the order of the primes).
fn prime_counts(h: &QPoly, g: &QPoly, x: u64) -> Result<Vec<PrimeCounts>> {
    if h.degree().unwrap_or(0) == 0 {
        return Err(Error::Domain("h must be non-constant".into()));
    }
    let (hi, gi, d) = integer_data(h, g);
    let lc = hi.last().expect("nonzero").clone();
    let ps: Vec<u64> = primes_up_to(x)
        .into_iter()
        .filter(|&p| p > 3 && reduce_big(&lc, p) != 0 && reduce_big(&d, p) != 0)
        .collect();
    Ok(ps.par_iter().map(|&p| counts_at(&hi, &gi, p)).collect())
}

/// `θ̂ = Σ_{p ≤ x} #{t : h(t) ≡ 0, (6g(t)|p) = 1} / π(x)` over the usable
/// primes.
pub fn qr_root_average(h: &QPoly, g: &QPoly, x: u64) -> Result<f64> {
    let c = prime_counts(h, g, x)?;
    if c.is_empty() {
        return Err(Error::Sample("no usable primes".into()));
    }
    let s: u64 = c.iter().map(|k| k.qr_roots as u64).sum();
    Ok(s as f64 / c.len() as f64)
}

/// Running-sum fit of the Chebotarev densities.
#[derive(Clone, Debug, Serialize)]
pub struct ChebotarevReport {
    pub x: u64,
    pub primes_used: usize,
    /// Slope of `Σ_{p≤y} #roots/p` against `log log y`.
    pub root_slope: f64,
    pub root_intercept: f64,
    /// Slope of `Σ_{p≤y} #qr-roots/p` against `log log y`.
    pub qr_slope: f64,
    pub qr_intercept: f64,
    /// Direct averages over the primes: `Σ #roots / π`, `Σ #qr-roots / π`.
    pub root_average: f64,
    pub qr_average: f64,
}

/// Least-squares line `y ≈ slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Density report for `h` (squarefree, coprime to `g`) over `p ≤ x`.
pub fn chebotarev_density_report(h: &QPoly, g: &QPoly, x: u64) -> Result<ChebotarevReport> {
    if x < 100 {
        return Err(Error::Sample(format!("prime bound {x} < 100")));
    }
    if !crate::algebra::qpoly::poly_gcd(h, g)?.is_constant() {
        return Err(Error::Domain("h and g share a factor".into()));
    }
    let c = prime_counts(h, g, x)?;
    let mut xs = Vec::with_capacity(c.len());
    let (mut yr, mut yq) = (Vec::with_capacity(c.len()), Vec::with_capacity(c.len()));
    let (mut sr, mut sq) = (0.0f64, 0.0f64);
    for k in &c {
        sr += k.roots as f64 / k.p as f64;
        sq += k.qr_roots as f64 / k.p as f64;
        xs.push((k.p as f64).ln().ln());
        yr.push(sr);
        yq.push(sq);
    }
    let (root_slope, root_intercept) = least_squares(&xs, &yr);
    let (qr_slope, qr_intercept) = least_squares(&xs, &yq);
    let n = c.len() as f64;
    Ok(ChebotarevReport {
        x,
        primes_used: c.len(),
        root_slope,
        root_intercept,
        qr_slope,
        qr_intercept,
        root_average: c.iter().map(|k| k.roots as f64).sum::<f64>() / n,
        qr_average: c.iter().map(|k| k.qr_roots as f64).sum::<f64>() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qpoly::qpoly;

    #[test]
    fn gaussian_integers_one_root_on_average() {
        let r = chebotarev_density_report(&qpoly(&[1, 0, 1]), &qpoly(&[1]), 100_000).unwrap();
        assert!((r.root_average - 1.0).abs() < 0.02, "{r:?}");
        // 6 is a square mod p for half the primes.
        assert!((r.qr_average - 0.5).abs() < 0.03, "{r:?}");
    }

    #[test]
    fn small_bound_rejected() {
        assert!(chebotarev_density_report(&qpoly(&[0, 1]), &qpoly(&[1]), 50).is_err());
    }

    #[test]
    fn linear_square_value() {
        // 6g(t) at the root t = −9 of t + 9 with g = 54: 324 = 18².
        let a = qr_root_average(&qpoly(&[9, 1]), &qpoly(&[54]), 10_000).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_line() {
        let (s, i) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    }
}
