//! Enumeration of parameter points `(a, b)` by height, congruence-class
//! densities and the local densities `ρ(pᵏ)`, `λ(p)`.
//!
//! A family is enumerated over the region
//! `ℛ_N = {(x, y) ∈ ℝ² : max(4|A(x,y)|³, 27B(x,y)²) ≤ N}`, which scales as
//! `ℛ_N = {(λ^τ x, λy) : (x, y) ∈ ℛ₁}` with `λ = N^{1/6ς}`.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::rational::{fmt_q, q_to_f64, Q};
use crate::algebra::whom::WHomPoly;
use crate::arith::{factor_u64, valuation};
use crate::curves::{disc_of, height0, m_of};
use crate::error::{Error, Result};
use crate::family::{AdmissibilityClass, FamilySpec};

/// `(a, b) ∈ 𝒯_{υ,τ}`: no prime `p` with `p^{υτ} | a` and `p^υ | b`.
pub fn in_coprimality_set(a: i64, b: i64, upsilon: u32, tau: u32) -> Result<bool> {
    if a == 0 && b == 0 {
        return Err(Error::Domain("(0, 0) is not a parameter point".into()));
    }
    let g = a.unsigned_abs().gcd(&b.unsigned_abs());
    if g == 1 {
        return Ok(true);
    }
    let ut = upsilon * tau;
    for (p, _) in factor_u64(g) {
        let pa = valuation(&BigInt::from(a), p);
        let pb = if b == 0 { u32::MAX } else { valuation(&BigInt::from(b), p) };
        if pa >= ut && pb >= upsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A weighted form with `f64` coefficients for fast approximate evaluation.
#[derive(Clone, Debug)]
pub struct FloatForm {
    terms: Vec<(i32, i32, f64)>,
}

impl FloatForm {
    pub fn new(p: &WHomPoly) -> Self {
        FloatForm {
            terms: p
                .terms()
                .into_iter()
                .map(|((i, j), c)| (i as i32, j as i32, q_to_f64(&c)))
                .collect(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * x.powi(i) * y.powi(j))
            .sum()
    }
}

/// `Φ(x, y) = max(4|A|³, 27B²)` in floating point.
#[derive(Clone, Debug)]
pub struct HeightFn {
    a: FloatForm,
    b: FloatForm,
}

impl HeightFn {
    pub fn new(fam: &FamilySpec) -> Self {
        HeightFn {
            a: FloatForm::new(&fam.a),
            b: FloatForm::new(&fam.b),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let a = self.a.eval(x, y);
        let b = self.b.eval(x, y);
        (4.0 * a.abs().powi(3)).max(27.0 * b * b)
    }
}

/// Relative inflation applied to numerically computed region extents.
pub const REGION_INFLATION: f64 = 1.02;

/// `sup_{ℛ₁} |H|` for a form `H` of weighted degree `w`, computed by scanning
/// the weighted directions `(t, 1)` and `(±1, s)` and refining the best
/// candidates by golden-section search; inflated by [`REGION_INFLATION`].
pub fn region_sup(fam: &FamilySpec, h: &dyn Fn(f64, f64) -> f64, weight: u32) -> Result<f64> {
    let phi = HeightFn::new(fam);
    let six_s = 6.0 * fam.varsigma as f64;
    let value = |x: f64, y: f64| -> f64 {
        let p = phi.eval(x, y);
        if p <= 0.0 || !p.is_finite() {
            return f64::INFINITY;
        }
        h(x, y).abs() * p.powf(-(weight as f64) / six_s)
    };
    let charts: [&dyn Fn(f64) -> (f64, f64); 3] = [&|t| (t, 1.0), &|s| (1.0, s), &|s| (-1.0, s)];
    let steps = 20_000usize;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut best = 0.0f64;
    for chart in charts {
        let at = |th: f64| {
            let (x, y) = chart(th.tan());
            value(x, y)
        };
        let grid: Vec<f64> = (1..steps)
            .map(|i| -half_pi + std::f64::consts::PI * i as f64 / steps as f64)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&th| at(th)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "{}: height function vanishes on a real direction (unbounded region)",
                fam.name
            )));
        }
        for i in 0..vals.len() {
            let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
            let right = if i + 1 < vals.len() { vals[i + 1] } else { f64::NEG_INFINITY };
            if vals[i] >= left && vals[i] >= right {
                let lo = if i > 0 { grid[i - 1] } else { grid[i] };
                let hi = if i + 1 < grid.len() { grid[i + 1] } else { grid[i] };
                best = best.max(golden_max(&at, lo, hi)).max(vals[i]);
            }
        }
    }
    Ok(best * REGION_INFLATION)
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    for _ in 0..60 {
        if f(c) > f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - r * (hi - lo);
        d = lo + r * (hi - lo);
    }
    f((lo + hi) / 2.0).max(f(c)).max(f(d))
}

/// Bounding box `|x| ≤ x_max`, `|y| ≤ y_max` of ℛ₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionBox {
    pub x_max: f64,
    pub y_max: f64,
}

/// The bounding box of ℛ₁.
pub fn region_box(fam: &FamilySpec) -> Result<RegionBox> {
    Ok(RegionBox {
        x_max: region_sup(fam, &|x, _| x, fam.tau)?,
        y_max: region_sup(fam, &|_, y| y, 1)?,
    })
}

/// One enumerated parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoint {
    pub a: i64,
    pub b: i64,
    pub big_a: BigInt,
    pub big_b: BigInt,
    pub disc: BigInt,
    /// `m(A, B)`.
    pub e: u64,
    /// `H = H₀ / e¹²`.
    pub height: Q,
}

/// Result of an enumeration.
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub points: Vec<ParamPoint>,
    /// Candidates inside the region with `Δ(a, b) = 0`.
    pub degenerate: usize,
    /// The values of `e` that were searched.
    pub e_values: Vec<u64>,
}

/// Search values of `e` for a family at height bound `n`.
pub fn e_candidates(fam: &FamilySpec, n: &BigInt, delta: u32) -> Result<Vec<u64>> {
    if delta == 0 {
        return Ok(vec![1]);
    }
    match fam.class {
        AdmissibilityClass::A1 | AdmissibilityClass::A2 => {
            let l = fam
                .lambda_hat_u64()
                .ok_or_else(|| Error::Resource("Λ̂ does not fit a machine word".into()))?;
            let mut ds: Vec<u64> = (1..=l).filter(|d| l % d == 0).collect();
            if l > 1_000_000 {
                return Err(Error::Resource(format!("Λ̂ = {l} too large to enumerate divisors")));
            }
            ds.sort_unstable();
            Ok(ds)
        }
        AdmissibilityClass::A3 | AdmissibilityClass::A4 => {
            let emax = e_max_common(fam, n)?;
            Ok((1..=emax).collect())
        }
    }
}

/// Upper bound for `e = m(A, B)` on ℛ_{Ne¹²} when `gcd(f³, g²) = K^r`:
/// `e¹² ≤ Λ_UW·|K(a,b)|^r ≤ Λ_UW·K_max^r·(Ne¹²)^β` with `β = r·wdeg(K)/(6ς)`.
pub fn e_max_common(fam: &FamilySpec, n: &BigInt) -> Result<u64> {
    let c = fam
        .common
        .as_ref()
        .ok_or_else(|| Error::Inapplicable("family has no common factor".into()))?;
    let pw = c
        .power
        .as_ref()
        .ok_or_else(|| Error::Inapplicable("gcd(f³, g²) is not a pure power".into()))?;
    let lam = pw
        .lambda_uw
        .as_ref()
        .ok_or_else(|| Error::Inapplicable("Λ_UW not computed for this class".into()))?;
    let kf = FloatForm::new(&c.k_form);
    let kmax = region_sup(fam, &|x, y| kf.eval(x, y), c.k_form.weighted_degree())?;
    let beta = pw.r as f64 * c.k_form.weighted_degree() as f64 / (6.0 * fam.varsigma as f64);
    if beta >= 1.0 {
        return Err(Error::Inapplicable("β ≥ 1: e is not bounded".into()));
    }
    let nf = n.to_f64().unwrap_or(f64::INFINITY);
    let log_rhs = lam.to_f64().unwrap_or(f64::INFINITY).ln() + pw.r as f64 * kmax.ln() + beta * nf.ln();
    let e = (log_rhs / (12.0 * (1.0 - beta))).exp();
    Ok(e.floor().max(1.0) as u64)
}

/// Sign normalization: the representative emitted for each curve.
///
/// For `υ = 1` the points `(a, b)` and `((−1)^τ a, −b)` give the same curve;
/// we emit `b > 0`, and for `b = 0` only `a > 0` when `τ` is odd.  For
/// `υ = 2` every `(a, b)` is a distinct twist and all are emitted.
pub fn is_normalized(a: i64, b: i64, upsilon: u32, tau: u32) -> bool {
    if upsilon == 2 {
        return true;
    }
    b > 0 || (b == 0 && (tau % 2 == 0 || a > 0))
}

fn pow_f(n: &BigInt, e: u64, exp: f64) -> f64 {
    (n.to_f64().unwrap_or(f64::INFINITY).ln() + 12.0 * (e as f64).ln()) * exp
}

/// Points of `𝒜^δ_υ(N)` (one per curve under [`is_normalized`]).
pub fn enum_points(fam: &FamilySpec, n: &BigInt, delta: u32) -> Result<Enumeration> {
    if n < &BigInt::one() {
        return Err(Error::Domain("height bound must be ≥ 1".into()));
    }
    let bx = region_box(fam)?;
    let es = e_candidates(fam, n, delta)?;
    let phi = HeightFn::new(fam);
    let six_s = 6.0 * fam.varsigma as f64;
    let mut out = Enumeration {
        e_values: es.clone(),
        ..Default::default()
    };
    for &e in &es {
        let bound = n * num_traits::pow(BigInt::from(e), 12);
        let bound_f = bound.to_f64().unwrap_or(f64::INFINITY);
        let xm = (bx.x_max.ln() + pow_f(n, e, fam.tau as f64 / six_s)).exp().floor() as i64;
        let ym = (bx.y_max.ln() + pow_f(n, e, 1.0 / six_s)).exp().floor() as i64;
        let b_lo = if fam.upsilon == 1 { 0 } else { -ym };
        let rows: Vec<(Vec<ParamPoint>, usize)> = (b_lo..=ym)
            .into_par_iter()
            .map(|b| {
                let mut pts = Vec::new();
                let mut degenerate = 0;
                for a in -xm..=xm {
                    if (a == 0 && b == 0) || !is_normalized(a, b, fam.upsilon, fam.tau) {
                        continue;
                    }
                    if phi.eval(a as f64, b as f64) > bound_f * (1.0 + 1e-9) {
                        continue;
                    }
                    if !in_coprimality_set(a, b, fam.upsilon, fam.tau).expect("nonzero") {
                        continue;
                    }
                    if let Some(p) = exact_point(fam, a, b, &bound, e, delta) {
                        match p {
                            Some(pt) => pts.push(pt),
                            None => degenerate += 1,
                        }
                    }
                }
                (pts, degenerate)
            })
            .collect();
        for (pts, d) in rows {
            out.points.extend(pts);
            out.degenerate += d;
        }
    }
    Ok(out)
}

/// Exact membership test for one candidate: `Some(Some(point))` if accepted,
/// `Some(None)` if degenerate and inside, `None` if rejected.
fn exact_point(fam: &FamilySpec, a: i64, b: i64, bound: &BigInt, e: u64, delta: u32) -> Option<Option<ParamPoint>> {
    let (ab, bb) = (BigInt::from(a), BigInt::from(b));
    let big_a = fam.a.eval_int(&ab, &bb).expect("integral form");
    let big_b = fam.b.eval_int(&ab, &bb).expect("integral form");
    let h0 = height0(&big_a, &big_b);
    if &h0 > bound {
        return None;
    }
    let disc = disc_of(&big_a, &big_b);
    if disc.is_zero() {
        // Degenerate points are attributed to the e = 1 pass only.
        return if e == 1 { Some(None) } else { None };
    }
    let m = m_of(&big_a, &big_b).expect("not both zero");
    let m = m.to_u64().expect("m fits u64");
    if delta == 1 && m != e {
        return None;
    }
    let height = Q::new(h0, num_traits::pow(BigInt::from(m), 12));
    Some(Some(ParamPoint {
        a,
        b,
        big_a,
        big_b,
        disc,
        e: m,
        height,
    }))
}

/// Writes points as CSV with columns `a,b,A,B,Delta,e,H`.
pub fn write_points_csv<W: Write>(w: &mut W, points: &[ParamPoint]) -> Result<()> {
    writeln!(w, "a,b,A,B,Delta,e,H")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.a,
            p.b,
            p.big_a,
            p.big_b,
            p.disc,
            p.e,
            fmt_q(&p.height)
        )?;
    }
    Ok(())
}

/// A congruence condition on parameter points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CongruenceClass {
    /// `(a, b) ∈ ℤ·(a₁, b₁) mod q`, among points with `gcd(a, b, q) = 1`.
    Projective { q: u64, a1: u64, b1: u64 },
    /// `(a, b) ≡ (a₁, b₁) mod q`, among all points.
    Affine { q: u64, a1: u64, b1: u64 },
}

impl CongruenceClass {
    pub fn modulus(&self) -> u64 {
        match *self {
            CongruenceClass::Projective { q, .. } | CongruenceClass::Affine { q, .. } => q,
        }
    }

    /// Whether the point counts towards the denominator.
    pub fn in_universe(&self, a: i64, b: i64) -> bool {
        match *self {
            CongruenceClass::Projective { q, .. } => {
                let q = q as i64;
                a.gcd(&b).gcd(&q) == 1
            }
            CongruenceClass::Affine { .. } => true,
        }
    }

    /// Whether the point lies in the class.
    pub fn contains(&self, a: i64, b: i64) -> bool {
        match *self {
            CongruenceClass::Projective { q, a1, b1 } => {
                let q = q as i64;
                let (a, b) = (a.rem_euclid(q), b.rem_euclid(q));
                (a * b1 as i64 - b * a1 as i64).rem_euclid(q) == 0 && self.in_universe(a, b)
            }
            CongruenceClass::Affine { q, a1, b1 } => {
                let q = q as i64;
                a.rem_euclid(q) == a1 as i64 % q && b.rem_euclid(q) == b1 as i64 % q
            }
        }
    }
}

/// Representatives `[a : 1]` and `[1 : b]` (`q | b`) of ℙ¹(ℤ/q) for prime `q`.
pub fn projective_line(q: u64) -> Vec<CongruenceClass> {
    let mut out: Vec<CongruenceClass> = (0..q).map(|a| CongruenceClass::Projective { q, a1: a, b1: 1 }).collect();
    out.push(CongruenceClass::Projective { q, a1: 1, b1: 0 });
    out
}

/// `|ℙ¹(ℤ/M)| = M ∏_{p | M} (1 + 1/p)`.
pub fn p1_size(m: u64) -> u64 {
    factor_u64(m).iter().fold(m, |acc, &(p, _)| acc / p * (p + 1))
}

/// Which counting statement supplies the prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DensityLaw {
    /// Affine classes for coprime `f, g`: `∏ p⁻²(1 − p^{−υ(1+τ)})⁻¹`.
    CoprimeAffine,
    /// Projective classes, unnormalized height: `1/|ℙ¹(ℤ/q)|`.
    ProjectiveUniform,
    /// Projective classes, naive height with a common factor: `∏λ(p)/|ℙ¹(ℤ/q)|`.
    ProjectiveWeighted,
}

/// Observed and predicted share of a congruence class.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub class: CongruenceClass,
    pub law: DensityLaw,
    pub observed_count: usize,
    pub total_count: usize,
    pub observed: f64,
    pub predicted: f64,
    /// Half-width of the interval on `predicted` (nonzero only when it
    /// involves truncated `λ(p)` sums).
    pub predicted_error: f64,
}

impl DensityReport {
    pub fn relative_error(&self) -> f64 {
        (self.observed / self.predicted - 1.0).abs()
    }
}

/// The prediction for a class, checking the hypotheses it needs.
pub fn predicted_density(fam: &FamilySpec, delta: u32, class: &CongruenceClass) -> Result<(DensityLaw, f64, f64)> {
    let q = class.modulus();
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let primes: Vec<u64> = factor_u64(q).into_iter().map(|(p, _)| p).collect();
    match (class, delta, fam.class) {
        (CongruenceClass::Affine { a1, b1, .. }, _, AdmissibilityClass::A1 | AdmissibilityClass::A2) => {
            if a1.gcd(b1).gcd(&q) != 1 {
                return Err(Error::Inapplicable("gcd(a₁, b₁, q) ≠ 1".into()));
            }
            let lam = fam.lambda_hat.clone().unwrap_or_else(BigInt::one);
            if !lam.gcd(&BigInt::from(q)).is_one() {
                return Err(Error::Inapplicable(format!("gcd(q, Λ̂) ≠ 1 (Λ̂ = {lam})")));
            }
            let exp = (fam.upsilon * (1 + fam.tau)) as i32;
            let v = primes
                .iter()
                .map(|&p| {
                    let p = p as f64;
                    p.powi(-2) / (1.0 - p.powi(-exp))
                })
                .product();
            Ok((DensityLaw::CoprimeAffine, v, 0.0))
        }
        (CongruenceClass::Projective { a1, b1, .. }, 0, _) => {
            if a1.gcd(b1).gcd(&q) != 1 {
                return Err(Error::Inapplicable("gcd(a₁, b₁, q) ≠ 1".into()));
            }
            Ok((DensityLaw::ProjectiveUniform, 1.0 / p1_size(q) as f64, 0.0))
        }
        (CongruenceClass::Projective { a1, b1, .. }, _, AdmissibilityClass::A3 | AdmissibilityClass::A4) => {
            let (ab, bb) = (BigInt::from(*a1), BigInt::from(*b1));
            let av = fam.a.eval_int(&ab, &bb).expect("integral");
            let bv = fam.b.eval_int(&ab, &bb).expect("integral");
            let g = (&av * &av * &av).gcd(&(&bv * &bv)).gcd(&BigInt::from(q));
            if !g.is_one() || a1.gcd(b1).gcd(&q) != 1 {
                return Err(Error::Inapplicable("gcd(A(a₁,b₁)³, B(a₁,b₁)², q) ≠ 1".into()));
            }
            let (mut lo, mut hi) = (1.0, 1.0);
            for &p in &primes {
                let l = lambda_p(fam, p, 3)?;
                lo *= l.lower;
                hi *= l.upper;
            }
            let n = p1_size(q) as f64;
            Ok((DensityLaw::ProjectiveWeighted, (lo + hi) / 2.0 / n, (hi - lo) / 2.0 / n))
        }
        _ => Err(Error::Inapplicable(
            "no counting statement for this class type and family".into(),
        )),
    }
}

/// Observed share of a class among enumerated points, with its prediction.
pub fn count_congruence(fam: &FamilySpec, points: &[ParamPoint], delta: u32, class: CongruenceClass) -> Result<DensityReport> {
    let (law, predicted, predicted_error) = predicted_density(fam, delta, &class)?;
    let universe: Vec<&ParamPoint> = points.iter().filter(|p| class.in_universe(p.a, p.b)).collect();
    let hits = universe.iter().filter(|p| class.contains(p.a, p.b)).count();
    let total = universe.len();
    if total == 0 {
        return Err(Error::Sample("no points in the universe of the class".into()));
    }
    Ok(DensityReport {
        class,
        law,
        observed_count: hits,
        total_count: total,
        observed: hits as f64 / total as f64,
        predicted,
        predicted_error,
    })
}

/// `ν(k) = max(⌈12k/r⌉, v_p(R))`.
pub fn nu(r: u32, v_r: u32, k: u32) -> Result<u32> {
    if ![1, 2, 3, 4, 6, 12].contains(&r) {
        return Err(Error::Domain(format!("r = {r} must divide 12")));
    }
    Ok((12 * k).div_ceil(r).max(v_r))
}

/// `ψ(n) = ∏_{p | n} p^{ν(v_p(n))}` with `v_p(R)` supplied per prime.
pub fn psi(n: u64, r: u32, v_r: &dyn Fn(u64) -> u32) -> Result<BigInt> {
    let mut out = BigInt::one();
    for (p, k) in factor_u64(n) {
        out *= num_traits::pow(BigInt::from(p), nu(r, v_r(p), k)? as usize);
    }
    Ok(out)
}

/// The exponent `r` and the resultant `R = Res(A³/K^r, B²/K^r)` of a family
/// (`r = 12`, `R = Res(A³, B²)` when `gcd(f³, g²) = 1`).
pub fn lattice_data(fam: &FamilySpec) -> Result<(u32, Q)> {
    let (r, u, w) = match &fam.common {
        Some(c) => {
            let pw = c
                .power
                .as_ref()
                .ok_or_else(|| Error::Inapplicable("gcd(f³, g²) is not a pure power".into()))?;
            (pw.r, pw.u.clone(), pw.w.clone())
        }
        None => (12, fam.a.pow(3), fam.b.pow(2)),
    };
    let res = hom_resultant(&u, &w)?;
    Ok((r, res))
}

/// Homogeneous resultant of two forms without the common factor `y`:
/// the univariate resultant times the contribution of a `y`-power.
fn hom_resultant(u: &WHomPoly, w: &WHomPoly) -> Result<Q> {
    let (eu, ew) = (u.y_multiplicity(), w.y_multiplicity());
    if eu > 0 && ew > 0 {
        return Err(Error::Domain("forms share the factor y".into()));
    }
    let (pu, pw) = (u.dehomogenize(), w.dehomogenize());
    let mut r = if pu.degree().unwrap_or(0) > 0 && pw.degree().unwrap_or(0) > 0 {
        crate::algebra::qpoly::poly_resultant(pu, pw)?
    } else {
        Q::one()
    };
    if eu > 0 {
        r *= num_traits::pow(pw.lc().expect("nonzero").clone(), eu as usize);
    }
    if ew > 0 {
        r *= num_traits::pow(pu.lc().expect("nonzero").clone(), ew as usize);
    }
    Ok(r)
}

/// Default node guard for [`rho_local`].
pub const RHO_NODE_GUARD: usize = 1_000_000;

/// `ρ(pᵏ) = η(pᵏ)/|ℙ¹(ℤ/ψ)|` with `η` the number of classes `[a : b]` mod
/// `ψ = p^{ν(k)}` with `p^{4k} | A(a,b)` and `p^{6k} | B(a,b)`.
///
/// The classes are counted by lifting `[a : 1]` and `[1 : pb]` digit by digit,
/// discarding a residue as soon as the necessary conditions mod `pʲ` fail;
/// `guard` bounds the number of visited residues.
pub fn rho_local(fam: &FamilySpec, p: u64, k: u32, guard: usize) -> Result<Q> {
    let (r, res) = lattice_data(fam)?;
    let v_r = if res.is_zero() {
        return Err(Error::Domain("vanishing lattice resultant".into()));
    } else {
        valuation(res.numer(), p)
    };
    let nu_k = nu(r, v_r, k)?;
    let psi = num_traits::pow(BigInt::from(p), nu_k as usize);
    let need = (4 * k, 6 * k);
    let check_mod = |x: &BigInt, e: u32| -> bool {
        let m = num_traits::pow(BigInt::from(p), e as usize);
        (x % m).is_zero()
    };
    let mut eta = 0u64;
    let mut visited = 0usize;
    // Chart 1: [a : 1]; chart 2: [1 : b] with p | b.
    for chart in 0..2 {
        let mut stack: Vec<(u32, BigInt)> = vec![(0, BigInt::zero())];
        while let Some((j, x)) = stack.pop() {
            visited += 1;
            if visited > guard {
                return Err(Error::Resource(format!(
                    "ρ({p}^{k}): more than {guard} residues mod ψ = {p}^{nu_k}"
                )));
            }
            let (a, b) = if chart == 0 {
                (x.clone(), BigInt::one())
            } else {
                (BigInt::one(), x.clone())
            };
            if chart == 1 && j >= 1 && !check_mod(&x, 1) {
                continue;
            }
            if j > 0 {
                let av = fam.a.eval_int(&a, &b).expect("integral");
                let bv = fam.b.eval_int(&a, &b).expect("integral");
                let full = j >= nu_k;
                let ok = |v: &BigInt, e: u32| check_mod(v, if full { e } else { e.min(j) });
                if !ok(&av, need.0) || !ok(&bv, need.1) {
                    continue;
                }
                if full {
                    eta += 1;
                    continue;
                }
            }
            let step = num_traits::pow(BigInt::from(p), j as usize);
            for d in 0..p {
                stack.push((j + 1, &x + &step * d));
            }
        }
    }
    let size = &psi + &psi / BigInt::from(p);
    Ok(Q::new(BigInt::from(eta), size))
}

/// `λ(p)` as an interval `[lower, upper]` from the sum truncated at `k_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaInterval {
    pub p: u64,
    pub k_max: u32,
    pub lower: f64,
    pub upper: f64,
}

impl LambdaInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `λ(p) = (1 + (1 − p^{−2/m}) Σ_{k≥1} p^{2k/m} ρ(pᵏ))⁻¹`.
///
/// The tail beyond `k_max` is zero once some `ρ(pᵏ)` vanishes (the
/// conditions are nested); otherwise it is bounded by a geometric series with
/// ratio `p^{−ξ}`, `ξ = 12/r − 2/m`, scaled from the last computed term.
pub fn lambda_p(fam: &FamilySpec, p: u64, k_max: u32) -> Result<LambdaInterval> {
    if k_max == 0 {
        return Err(Error::Domain("k_max must be ≥ 1".into()));
    }
    let (r, _) = lattice_data(fam)?;
    let m = fam.m as f64;
    let pf = p as f64;
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut vanished = false;
    for k in 1..=k_max {
        let rho = q_to_f64(&rho_local(fam, p, k, RHO_NODE_GUARD)?);
        let term = pf.powf(2.0 * k as f64 / m) * rho;
        sum += term;
        last = term;
        if rho == 0.0 {
            vanished = true;
            break;
        }
    }
    let xi = 12.0 / r as f64 - 2.0 / m;
    let tail = if vanished || xi <= 0.0 {
        if xi <= 0.0 && !vanished {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        let ratio = pf.powf(-xi);
        last * ratio / (1.0 - ratio)
    };
    let c = 1.0 - pf.powf(-2.0 / m);
    Ok(LambdaInterval {
        p,
        k_max,
        lower: 1.0 / (1.0 + c * (sum + tail)),
        upper: 1.0 / (1.0 + c * sum),
    })
}

/// Monte Carlo estimate of `Vol(ℛ₁)` with a 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub half_width: f64,
    pub samples: u64,
}

/// `Vol(ℛ₁)` by uniform sampling of its bounding box.
pub fn region_volume(fam: &FamilySpec, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if samples < 10_000 {
        return Err(Error::Sample(format!("{samples} samples < 10⁴")));
    }
    let bx = region_box(fam)?;
    let phi = HeightFn::new(fam);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = rng.gen_range(-bx.x_max..bx.x_max);
        let y = rng.gen_range(-bx.y_max..bx.y_max);
        if phi.eval(x, y) <= 1.0 {
            hits += 1;
        }
    }
    let area = 4.0 * bx.x_max * bx.y_max;
    let frac = hits as f64 / samples as f64;
    if hits == 0 {
        return Err(Error::Domain("no sample fell in the region".into()));
    }
    Ok(VolumeEstimate {
        volume: frac * area,
        half_width: 1.96 * (frac * (1.0 - frac) / samples as f64).sqrt() * area,
        samples,
    })
}

/// `Vol(ℛ₁)` by a midpoint rule on an `n × n` grid over the bounding box.
pub fn region_volume_grid(fam: &FamilySpec, n: usize) -> Result<f64> {
    let bx = region_box(fam)?;
    let phi = HeightFn::new(fam);
    let (dx, dy) = (2.0 * bx.x_max / n as f64, 2.0 * bx.y_max / n as f64);
    let inside: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = -bx.x_max + (i as f64 + 0.5) * dx;
            (0..n)
                .filter(|&j| phi.eval(x, -bx.y_max + (j as f64 + 0.5) * dy) <= 1.0)
                .count()
        })
        .sum();
    Ok(inside as f64 * dx * dy)
}

/// `N^{(τ+1)/6ς}·V`, the volume of ℛ_N.
pub fn scaled_volume(fam: &FamilySpec, n: f64, v: f64) -> f64 {
    n.powf((fam.tau + 1) as f64 / (6.0 * fam.varsigma as f64)) * v
}

/// Parses a height bound such as `1e12`, `10^6` or `250000` to an exact integer.
pub fn parse_height(s: &str) -> Result<BigInt> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad height bound {s:?}"));
    let (mant, exp) = if let Some((m, e)) = s.split_once(['e', 'E']) {
        (m, e.parse::<u32>().map_err(|_| bad())?)
    } else if let Some((b, e)) = s.split_once('^') {
        if b != "10" {
            return Err(bad());
        }
        ("1", e.parse::<u32>().map_err(|_| bad())?)
    } else {
        (s, 0)
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let fl = frac.len() as u32;
    if fl > exp && frac[(exp as usize)..].chars().any(|c| c != '0') {
        return Err(Error::Parse(format!("height bound {s:?} is not an integer")));
    }
    let v: BigInt = digits.parse().map_err(|_| bad())?;
    let out = if fl > exp {
        v / num_traits::pow(BigInt::from(10), (fl - exp) as usize)
    } else {
        v * num_traits::pow(BigInt::from(10), (exp - fl) as usize)
    };
    if out.is_negative() || out.is_zero() {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coprimality_examples() {
        assert!(!in_coprimality_set(4, 2, 1, 2).unwrap());
        assert!(!in_coprimality_set(3, 6, 1, 1).unwrap());
        assert!(in_coprimality_set(2, 3, 2, 3).unwrap());
        assert!(in_coprimality_set(4, 2, 2, 1).unwrap());
        assert!(in_coprimality_set(0, 1, 1, 1).unwrap());
        assert!(in_coprimality_set(0, 0, 1, 1).is_err());
    }

    #[test]
    fn nu_psi_examples() {
        assert_eq!(nu(2, 0, 1).unwrap(), 6);
        assert_eq!(nu(12, 7, 1).unwrap(), 7);
        assert!(nu(5, 0, 1).is_err());
        let p = 7u64;
        assert_eq!(psi(p, 2, &|_| 0).unwrap(), BigInt::from(p).pow(6));
    }

    #[test]
    fn p1_sizes() {
        assert_eq!(p1_size(5), 6);
        assert_eq!(p1_size(25), 30);
        assert_eq!(p1_size(6), 12);
        assert_eq!(projective_line(7).len(), 8);
    }

    #[test]
    fn height_parsing() {
        assert_eq!(parse_height("1e12").unwrap(), BigInt::from(10u64.pow(12)));
        assert_eq!(parse_height("2.5e3").unwrap(), BigInt::from(2500));
        assert_eq!(parse_height("10^6").unwrap(), BigInt::from(1_000_000));
        assert_eq!(parse_height("42").unwrap(), BigInt::from(42));
        assert!(parse_height("1.5").is_err());
        assert!(parse_height("abc").is_err());
        assert!(parse_height("0").is_err());
    }

    #[test]
    fn projective_membership() {
        let c = CongruenceClass::Projective { q: 5, a1: 2, b1: 1 };
        assert!(c.contains(2, 1));
        assert!(c.contains(4, 2));
        assert!(c.contains(-2, -1));
        assert!(!c.contains(1, 2));
        assert!(!c.contains(5, 10));
        let inf = CongruenceClass::Projective { q: 5, a1: 1, b1: 0 };
        assert!(inf.contains(3, 5));
    }
}
