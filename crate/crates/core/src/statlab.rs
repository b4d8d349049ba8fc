//! Local Tamagawa-ratio exponents `Y°_p(a, b)`, per-curve exponent sums, the
//! exact cross-check against Tamagawa numbers of minimal models, and the
//! family-level experiments (distribution, averages, tails).

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::modp::reduce_big;
use crate::algebra::rational::{fmt_q, q_to_f64, Q};
use crate::algebra::whom::WHomPoly;
use crate::arith::{factor_integer, jacobi_u64, legendre_unchecked, primes_up_to, valuation};
use crate::curves::{local_data, CurveModel, ReductionKind};
use crate::enumerate::{enum_points, Enumeration, ParamPoint};
use crate::error::{Error, Result};
use crate::family::chebotarev::least_squares;
use crate::family::{delta_of_a, FamilyConstants, FamilySpec};

/// Why a prime is left out of the exponent sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ExclusionReason {
    /// `p` lies in the family's excluded set.
    BadPrime,
    /// `p` divides both `D₊(a,b)` and `D₋(a,b)`.
    CommonDisc,
    /// `ℓ ∈ {2, 3}` and `p` divides both `A(a,b)` and `B(a,b)`.
    CommonAB,
    /// `ℓ = 2` and `p²` divides `R(a,b)`, `R` the radical of `D₊D₋`.
    SquareHit,
}

/// `Y°_p(a, b)` or the reason it is not assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalExponent {
    Value(i8),
    Excluded(ExclusionReason),
}

/// The forms of a family evaluated at one parameter point.
#[derive(Clone, Debug)]
pub struct PointValues {
    pub a: BigInt,
    pub b: BigInt,
    pub d_plus: BigInt,
    pub d_minus: BigInt,
    pub d_plus1: BigInt,
    pub d_plus2: BigInt,
    pub d_minus1: BigInt,
    pub d_minus2: BigInt,
    pub radical: BigInt,
}

/// Numerator of a form's value: at primes outside the excluded set it has
/// the same valuation as the value itself.
fn ev(f: &WHomPoly, a: &BigInt, b: &BigInt) -> BigInt {
    f.eval(a, b).numer().clone()
}

impl PointValues {
    pub fn new(fam: &FamilySpec, a: i64, b: i64) -> Self {
        let (x, y) = (BigInt::from(a), BigInt::from(b));
        let s = &fam.split;
        PointValues {
            a: ev(&fam.a, &x, &y),
            b: ev(&fam.b, &x, &y),
            d_plus: ev(&s.d_plus, &x, &y),
            d_minus: ev(&s.d_minus, &x, &y),
            d_plus1: ev(&s.d_plus1, &x, &y),
            d_plus2: ev(&s.d_plus2, &x, &y),
            d_minus1: ev(&s.d_minus1, &x, &y),
            d_minus2: ev(&s.d_minus2, &x, &y),
            radical: ev(&s.radical, &x, &y),
        }
    }

    /// `Y°_p` from the evaluated forms.
    pub fn local_exponent(&self, fam: &FamilySpec, p: u64) -> LocalExponent {
        use ExclusionReason::*;
        if fam.is_excluded(p) {
            return LocalExponent::Excluded(BadPrime);
        }
        let pb = BigInt::from(p);
        let div = |x: &BigInt| (x % &pb).is_zero();
        let (dp, dm) = (div(&self.d_plus), div(&self.d_minus));
        if dp && dm {
            return LocalExponent::Excluded(CommonDisc);
        }
        let common_ab = div(&self.a) && div(&self.b);
        if common_ab && fam.ell <= 3 {
            return LocalExponent::Excluded(CommonAB);
        }
        if common_ab {
            return LocalExponent::Value(0);
        }
        if !dp && !dm {
            return LocalExponent::Value(0);
        }
        if fam.ell == 2 && valuation(&self.radical, p) >= 2 {
            return LocalExponent::Excluded(SquareHit);
        }
        let qr = || legendre_unchecked(&(&self.b * 6u32), p) == 1;
        let sign = if dp { 1 } else { -1 };
        let hit = if fam.ell == 2 {
            let (d1, d2) = if dp {
                (&self.d_plus1, &self.d_plus2)
            } else {
                (&self.d_minus1, &self.d_minus2)
            };
            div(d1) || (div(d2) && qr())
        } else {
            qr()
        };
        LocalExponent::Value(if hit { sign } else { 0 })
    }
}

/// `Y°_p(a, b)` for one prime.
pub fn local_exponent(fam: &FamilySpec, a: i64, b: i64, p: u64) -> LocalExponent {
    PointValues::new(fam, a, b).local_exponent(fam, p)
}

/// Exponents of one curve.
#[derive(Clone, Debug, Serialize)]
pub struct CurveRecord {
    #[serde(skip)]
    pub point: ParamPoint,
    /// Primes with a nonzero exponent.
    pub local_exponents: Vec<(u64, i8)>,
    /// Primes dividing `Δ(a,b)Δ′(a,b)` (or `D₊D₋`) that were left out.
    pub excluded_hits: Vec<(u64, ExclusionReason)>,
    pub exponent_sum: i64,
    pub n_plus: u32,
    pub n_minus: u32,
}

impl CurveRecord {
    /// Sum of the exponents over primes `p ≤ cut`.
    pub fn partial_sum(&self, cut: u64) -> i64 {
        self.local_exponents
            .iter()
            .filter(|(p, _)| *p <= cut)
            .map(|&(_, e)| e as i64)
            .sum()
    }

    pub fn exponent_at(&self, p: u64) -> i8 {
        self.local_exponents
            .iter()
            .find(|(q, _)| *q == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }
}

fn prime_divisors(n: &BigInt) -> Result<Vec<u64>> {
    if n.is_zero() || n.abs().is_one() {
        return Ok(Vec::new());
    }
    factor_integer(n)?
        .factors
        .into_iter()
        .map(|(p, _)| {
            p.to_u64()
                .ok_or_else(|| Error::Resource(format!("prime factor {p} exceeds 64 bits")))
        })
        .collect()
}

/// The exponent record of the curve at a parameter point.
pub fn curve_exponent_sum(fam: &FamilySpec, point: &ParamPoint) -> Result<CurveRecord> {
    if point.disc.is_zero() {
        return Err(Error::Domain(format!("Δ({}, {}) = 0", point.a, point.b)));
    }
    let v = PointValues::new(fam, point.a, point.b);
    let mut primes: Vec<u64> = prime_divisors(&v.d_plus)
        .and_then(|mut ps| {
            ps.extend(prime_divisors(&v.d_minus)?);
            Ok(ps)
        })
        .map_err(|e| Error::Resource(format!("factoring D±({}, {}): {e}", point.a, point.b)))?;
    let (x, y) = (BigInt::from(point.a), BigInt::from(point.b));
    let disc_prime = ev(&fam.disc_prime, &x, &y);
    for &p in &fam.excluded_primes {
        let pb = BigInt::from(p);
        if (&point.disc % &pb).is_zero() || (&disc_prime % &pb).is_zero() {
            primes.push(p);
        }
    }
    primes.sort_unstable();
    primes.dedup();
    let mut rec = CurveRecord {
        point: point.clone(),
        local_exponents: Vec::new(),
        excluded_hits: Vec::new(),
        exponent_sum: 0,
        n_plus: 0,
        n_minus: 0,
    };
    for p in primes {
        match v.local_exponent(fam, p) {
            LocalExponent::Value(0) => {}
            LocalExponent::Value(e) => {
                rec.local_exponents.push((p, e));
                rec.exponent_sum += e as i64;
                if e > 0 {
                    rec.n_plus += 1;
                } else {
                    rec.n_minus += 1;
                }
            }
            LocalExponent::Excluded(r) => rec.excluded_hits.push((p, r)),
        }
    }
    Ok(rec)
}

/// Records for every point, computed in parallel (order preserved).
pub fn curve_records(fam: &FamilySpec, points: &[ParamPoint]) -> Result<Vec<CurveRecord>> {
    points.par_iter().map(|p| curve_exponent_sum(fam, p)).collect()
}

/// Writes records as CSV: `a,b,H,exponent_sum,n_plus,n_minus,n_excluded`.
pub fn write_records_csv<W: Write>(w: &mut W, recs: &[CurveRecord]) -> Result<()> {
    writeln!(w, "a,b,H,exponent_sum,n_plus,n_minus,n_excluded")?;
    for r in recs {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.point.a,
            r.point.b,
            fmt_q(&r.point.height),
            r.exponent_sum,
            r.n_plus,
            r.n_minus,
            r.excluded_hits.len()
        )?;
    }
    Ok(())
}

/// The codomain curve at a parameter point, scaled to integral coefficients.
pub fn codomain_curve(fam: &FamilySpec, a: i64, b: i64) -> CurveModel {
    let (x, y) = (BigInt::from(a), BigInt::from(b));
    let ap = fam.a_prime.eval(&x, &y);
    let bp = fam.b_prime.eval(&x, &y);
    let lam = ap.denom().lcm(bp.denom());
    let l4 = num_traits::pow(lam.clone(), 4);
    let l6 = num_traits::pow(lam, 6);
    let ai = (ap * Q::from_integer(l4)).to_integer();
    let bi = (bp * Q::from_integer(l6)).to_integer();
    CurveModel::new(ai, bi)
}

/// `v_ℓ(c_p(E′)/c_p(E))` from minimal models, or `None` under additive
/// reduction (where the Tamagawa numbers are not computed).
pub fn oracle_exponent(fam: &FamilySpec, a: i64, b: i64, p: u64) -> Result<Option<i32>> {
    let (x, y) = (BigInt::from(a), BigInt::from(b));
    let e = CurveModel::new(ev(&fam.a, &x, &y), ev(&fam.b, &x, &y));
    let ep = codomain_curve(fam, a, b);
    let (l, lp) = (local_data(&e, p)?, local_data(&ep, p)?);
    match (l.tamagawa, lp.tamagawa) {
        (Some(c), Some(cp)) => {
            let v = |n: u32| valuation(&BigInt::from(n), fam.ell) as i32;
            Ok(Some(v(cp) - v(c)))
        }
        _ => Ok(None),
    }
}

/// Outcome of comparing `Y°_p` with the exact Tamagawa ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleCheck {
    Agree { exponent: i8 },
    Disagree { exponent: i8, oracle: i32 },
    /// Additive reduction: the ratio is not computed.
    SkippedAdditive,
    /// `p` is excluded: `Y°_p` is not assigned.
    SkippedExcluded(ExclusionReason),
}

/// Compares `Y°_p(a,b)` with `v_ℓ(c_p(E′_{a,b})/c_p(E_{a,b}))` at `p > 3`.
pub fn oracle_cross_check(fam: &FamilySpec, a: i64, b: i64, p: u64) -> Result<OracleCheck> {
    if p <= 3 {
        return Err(Error::UnsupportedPrime(p));
    }
    let exponent = match local_exponent(fam, a, b, p) {
        LocalExponent::Value(e) => e,
        LocalExponent::Excluded(r) => return Ok(OracleCheck::SkippedExcluded(r)),
    };
    Ok(match oracle_exponent(fam, a, b, p)? {
        None => OracleCheck::SkippedAdditive,
        Some(o) if o == exponent as i32 => OracleCheck::Agree { exponent },
        Some(oracle) => OracleCheck::Disagree { exponent, oracle },
    })
}

/// Oracle statistics over a set of curves.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleSummary {
    pub curves: usize,
    /// Non-excluded multiplicative primes `p > 3` compared.
    pub compared: usize,
    pub agreements: usize,
    pub disagreements: Vec<(i64, i64, u64, i8, i32)>,
    /// Non-excluded primes with additive reduction.
    pub skipped_additive: usize,
    /// Bad primes `p > 3` of the curve that were excluded.
    pub excluded: usize,
}

/// Cross-checks every bad prime `p > 3` of every curve.
pub fn oracle_sweep(fam: &FamilySpec, points: &[ParamPoint]) -> Result<OracleSummary> {
    let parts: Vec<OracleSummary> = points
        .par_iter()
        .map(|pt| -> Result<OracleSummary> {
            let mut s = OracleSummary {
                curves: 1,
                ..Default::default()
            };
            let e = CurveModel::new(pt.big_a.clone(), pt.big_b.clone());
            for p in prime_divisors(&pt.disc)? {
                if p <= 3 {
                    continue;
                }
                let kind = local_data(&e, p)?.reduction.kind;
                if kind == ReductionKind::Good {
                    continue;
                }
                match oracle_cross_check(fam, pt.a, pt.b, p)? {
                    OracleCheck::Agree { .. } => {
                        s.compared += 1;
                        s.agreements += 1;
                    }
                    OracleCheck::Disagree { exponent, oracle } => {
                        s.compared += 1;
                        s.disagreements.push((pt.a, pt.b, p, exponent, oracle));
                    }
                    OracleCheck::SkippedAdditive => s.skipped_additive += 1,
                    OracleCheck::SkippedExcluded(_) => s.excluded += 1,
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut out = OracleSummary::default();
    for s in parts {
        out.curves += s.curves;
        out.compared += s.compared;
        out.agreements += s.agreements;
        out.disagreements.extend(s.disagreements);
        out.skipped_additive += s.skipped_additive;
        out.excluded += s.excluded;
    }
    Ok(out)
}

/// `Σ_p Y°_p` with the excluded primes `p > 3` resolved by the exact
/// Tamagawa ratio where it is computable; returns the resolved sum and the
/// number of excluded primes left unresolved.
pub fn resolved_sum(fam: &FamilySpec, rec: &CurveRecord) -> Result<(i64, usize)> {
    let mut s = rec.exponent_sum;
    let mut unresolved = 0;
    for &(p, _) in &rec.excluded_hits {
        if p <= 3 {
            unresolved += 1;
            continue;
        }
        match oracle_exponent(fam, rec.point.a, rec.point.b, p)? {
            Some(v) => s += v as i64,
            None => unresolved += 1,
        }
    }
    Ok((s, unresolved))
}

/// Inverse of a unit `d` modulo `m`.
fn unit_inverse(d: u64, m: u64) -> u64 {
    let e = (d as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

/// A weighted form reduced mod `p`.
struct ModPForm {
    terms: Vec<(usize, usize, u64)>,
}

impl ModPForm {
    fn new(f: &WHomPoly, p: u64) -> Self {
        let terms = f
            .terms()
            .into_iter()
            .map(|((i, j), c)| {
                // `p` may be a prime square; denominators are units there
                // because their primes are excluded.
                let n = reduce_big(c.numer(), p);
                let d = reduce_big(c.denom(), p);
                (i as usize, j as usize, (n as u128 * unit_inverse(d, p) as u128 % p as u128) as u64)
            })
            .collect();
        ModPForm { terms }
    }

    fn eval(&self, pa: &[u64], pb: &[u64], p: u64) -> u64 {
        self.terms
            .iter()
            .fold(0, |acc, &(i, j, c)| {
                let t = c as u128 * pa[i] as u128 % p as u128 * pb[j] as u128 % p as u128;
                ((acc as u128 + t) % p as u128) as u64
            })
    }

    fn max_deg(&self) -> usize {
        self.terms.iter().map(|&(i, j, _)| i.max(j)).max().unwrap_or(0)
    }
}

/// Exact densities of `Y°_p = ±1` over `(a, b) ∈ 𝔽_p² ∖ {0}`, as weighted
/// counts over `classes`.
///
/// For `ℓ ≥ 3` every condition is a condition mod `p` and each class has
/// weight 1 (`classes = p² − 1`).  For `ℓ = 2` the exclusion `p² | R(a,b)`
/// depends on `(a, b) mod p²`: each class mod `p` is weighted by its number
/// of lifts mod `p²` with `p² ∤ R` (`classes = p²(p² − 1)`).
#[derive(Clone, Debug, Serialize)]
pub struct PrimeDensity {
    pub p: u64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub classes: u64,
}

impl PrimeDensity {
    pub fn d_plus(&self) -> Q {
        Q::new(self.n_plus.into(), self.classes.into())
    }
    pub fn d_minus(&self) -> Q {
        Q::new(self.n_minus.into(), self.classes.into())
    }
}

/// Lifts `(a + ps, b + pt)` mod `p²` of a class with `p | R(a,b)` at which
/// `p² ∤ R`.  `R` is linear in `(s, t)` mod `p²`, so three values suffice.
fn lifts_without_square(r: &ModPForm, a: u64, b: u64, p: u64) -> u64 {
    let p2 = p * p;
    let val = |x: u64, y: u64| r.eval(&powers(x, r.max_deg(), p2), &powers(y, r.max_deg(), p2), p2);
    let r0 = val(a, b);
    let ra = (val(a + p, b) + p2 - r0) % p2 / p;
    let rb = (val(a, b + p) + p2 - r0) % p2 / p;
    let c = r0 / p;
    let zeros = if ra % p != 0 || rb % p != 0 {
        p
    } else if c % p == 0 {
        p2
    } else {
        0
    };
    p2 - zeros
}

fn powers(x: u64, deg: usize, m: u64) -> Vec<u64> {
    let mut v = vec![1 % m; deg + 1];
    for i in 1..=deg {
        v[i] = v[i - 1] * (x % m) % m;
    }
    v
}

/// Densities of `Y°_p = ±1` from the residues of `(a, b)`.
pub fn prime_density(fam: &FamilySpec, p: u64) -> Result<PrimeDensity> {
    if fam.is_excluded(p) {
        return Err(Error::Domain(format!("{p} is an excluded prime")));
    }
    let s = &fam.split;
    let forms: Vec<ModPForm> = [&fam.a, &fam.b, &s.d_plus, &s.d_minus, &s.d_plus1, &s.d_plus2, &s.d_minus1, &s.d_minus2]
        .iter()
        .map(|f| ModPForm::new(f, p))
        .collect();
    let ell = fam.ell;
    let radical = (ell == 2).then(|| ModPForm::new(&s.radical, p * p));
    let deg = forms.iter().map(|f| f.max_deg()).max().unwrap_or(0);
    let (np, nm) = (0..p)
        .into_par_iter()
        .map(|a| {
            let pa = powers(a, deg, p);
            let (mut np, mut nm) = (0u64, 0u64);
            for b in 0..p {
                if a == 0 && b == 0 {
                    continue;
                }
                let pb = powers(b, deg, p);
                let v: Vec<u64> = forms.iter().map(|f| f.eval(&pa, &pb, p)).collect();
                let (dp, dm) = (v[2] == 0, v[3] == 0);
                if (dp && dm) || (!dp && !dm) || (v[0] == 0 && v[1] == 0) {
                    continue;
                }
                let qr = jacobi_u64(6 * v[1] % p, p) == 1;
                let (hit, weight) = match &radical {
                    Some(r) => {
                        let (d1, d2) = if dp { (v[4], v[5]) } else { (v[6], v[7]) };
                        (d1 == 0 || (d2 == 0 && qr), lifts_without_square(r, a, b, p))
                    }
                    None => (qr, 1),
                };
                if hit {
                    if dp {
                        np += weight;
                    } else {
                        nm += weight;
                    }
                }
            }
            (np, nm)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let classes = if ell == 2 { p * p * (p * p - 1) } else { p * p - 1 };
    Ok(PrimeDensity {
        p,
        n_plus: np,
        n_minus: nm,
        classes,
    })
}

/// Per-prime densities up to `p_cut` with their cumulative log-log fit.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalProfile {
    pub p_cut: u64,
    pub densities: Vec<PrimeDensity>,
    /// Slopes of `Σ_{p ≤ y} d±(p)` against `log log y`.
    pub slope_plus: f64,
    pub slope_minus: f64,
    pub intercept_plus: f64,
    pub intercept_minus: f64,
}

/// Exact densities for every non-excluded `p ≤ p_cut`.
pub fn theoretical_profile(fam: &FamilySpec, p_cut: u64) -> Result<TheoreticalProfile> {
    if p_cut > 1000 {
        return Err(Error::Domain("p_cut must be ≤ 1000".into()));
    }
    let densities: Vec<PrimeDensity> = primes_up_to(p_cut)
        .into_iter()
        .filter(|&p| !fam.is_excluded(p))
        .map(|p| prime_density(fam, p))
        .collect::<Result<_>>()?;
    let (mut xs, mut yp, mut ym) = (Vec::new(), Vec::new(), Vec::new());
    let (mut sp, mut sm) = (0.0, 0.0);
    for d in &densities {
        sp += q_to_f64(&d.d_plus());
        sm += q_to_f64(&d.d_minus());
        if d.p >= 5 {
            xs.push((d.p as f64).ln().ln());
            yp.push(sp);
            ym.push(sm);
        }
    }
    let ((slope_plus, intercept_plus), (slope_minus, intercept_minus)) = if xs.len() >= 2 {
        (least_squares(&xs, &yp), least_squares(&xs, &ym))
    } else {
        ((f64::NAN, f64::NAN), (f64::NAN, f64::NAN))
    };
    Ok(TheoreticalProfile {
        p_cut,
        densities,
        slope_plus,
        slope_minus,
        intercept_plus,
        intercept_minus,
    })
}

/// Exact power sums `Σ sᵏ`, `k = 0..4`, and the derived moments.
#[derive(Clone, Debug, Serialize)]
pub struct Moments {
    pub count: u64,
    pub power_sums: [String; 4],
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Moments of integer samples, accumulated exactly.
pub fn moments(xs: &[i64]) -> Result<Moments> {
    if xs.is_empty() {
        return Err(Error::Sample("no samples".into()));
    }
    let mut s = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
    for &x in xs {
        let x = BigInt::from(x);
        let mut pw = x.clone();
        for sk in s.iter_mut() {
            *sk += &pw;
            pw *= &x;
        }
    }
    let n = Q::from_integer(BigInt::from(xs.len()));
    let m: Vec<Q> = s.iter().map(|v| Q::from_integer(v.clone()) / &n).collect();
    let mean = m[0].clone();
    let q = |k: i64| Q::from_integer(k.into());
    let var = &m[1] - &mean * &mean;
    let c3 = &m[2] - q(3) * &mean * &m[1] + q(2) * mean.pow(3);
    let c4 = &m[3] - q(4) * &mean * &m[2] + q(6) * mean.pow(2) * &m[1] - q(3) * mean.pow(4);
    let vf = q_to_f64(&var);
    let (skew, kurt) = if var.is_zero() {
        (None, None)
    } else {
        (
            Some(q_to_f64(&c3) / vf.powf(1.5)),
            Some(q_to_f64(&(c4 / (&var * &var))) - 3.0),
        )
    };
    Ok(Moments {
        count: xs.len() as u64,
        power_sums: s.map(|v| v.to_string()),
        mean: q_to_f64(&mean),
        variance: vf,
        skewness: skew,
        excess_kurtosis: kurt,
    })
}

/// Distribution of a sum of independent `{−1, 0, +1}` variables, indexed by
/// `sum + offset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumDistribution {
    pub offset: i64,
    pub probs: Vec<f64>,
}

impl SumDistribution {
    pub fn point_mass_zero() -> Self {
        SumDistribution {
            offset: 0,
            probs: vec![1.0],
        }
    }

    /// Adds an independent variable with `P(+1) = dp`, `P(−1) = dm`.
    pub fn convolve(&self, dp: f64, dm: f64) -> Self {
        let n = self.probs.len();
        let mut out = vec![0.0; n + 2];
        for (i, &w) in self.probs.iter().enumerate() {
            out[i] += w * dm;
            out[i + 1] += w * (1.0 - dp - dm);
            out[i + 2] += w * dp;
        }
        SumDistribution {
            offset: self.offset + 1,
            probs: out,
        }
    }

    /// Empirical distribution of integer samples.
    pub fn empirical(xs: &[i64]) -> Self {
        let (lo, hi) = (
            xs.iter().copied().min().unwrap_or(0),
            xs.iter().copied().max().unwrap_or(0),
        );
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        for &x in xs {
            probs[(x - lo) as usize] += 1.0;
        }
        let n = xs.len().max(1) as f64;
        probs.iter_mut().for_each(|p| *p /= n);
        SumDistribution { offset: -lo, probs }
    }

    pub fn prob(&self, s: i64) -> f64 {
        let i = s + self.offset;
        if i < 0 {
            0.0
        } else {
            self.probs.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    fn support(&self) -> (i64, i64) {
        (-self.offset, self.probs.len() as i64 - 1 - self.offset)
    }
}

/// Total-variation distance `½ Σ |P(s) − Q(s)|`.
pub fn tv_distance(p: &SumDistribution, q: &SumDistribution) -> f64 {
    let (a, b) = (p.support(), q.support());
    (a.0.min(b.0)..=a.1.max(b.1))
        .map(|s| (p.prob(s) - q.prob(s)).abs())
        .sum::<f64>()
        / 2.0
}

/// Empirical versus exact frequency of `Y°_p = ±1` at one prime.
#[derive(Clone, Debug, Serialize)]
pub struct PrimeFrequency {
    pub p: u64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub count_plus: u64,
    pub count_minus: u64,
    pub freq_plus: f64,
    pub freq_minus: f64,
    /// `|freq − d| / √(d(1−d)/n)` (0 when both sides vanish).
    pub z_plus: f64,
    pub z_minus: f64,
    /// Both frequencies within three binomial standard errors.
    pub consistent: bool,
}

fn z_score(freq: f64, d: f64, n: f64) -> f64 {
    let se = (d * (1.0 - d) / n).sqrt();
    if se == 0.0 {
        if (freq - d).abs() < 1e-15 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (freq - d).abs() / se
    }
}

/// Summary of a distribution experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub family: String,
    pub n: String,
    pub curve_count: usize,
    pub degenerate: usize,
    pub log_log_n: f64,
    pub mu: String,
    pub sigma_sq: String,
    pub moments: Moments,
    /// `(mean − μL)/√(σ²L)` and `variance/(σ²L)` with `L = log log N`.
    pub standardized_mean: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub p_cut: u64,
    pub per_prime: Vec<PrimeFrequency>,
    pub consistent_fraction: f64,
    /// TV distance between the empirical law of `Σ_{p ≤ p_cut} Y°_p` and the
    /// convolution of the exact per-prime laws.
    pub tv_distance: f64,
    pub slope_plus: f64,
    pub slope_minus: f64,
}

/// Minimum number of curves for a distribution experiment.
pub const MIN_CURVES: usize = 1000;

/// Enumerates the family at height `n` and computes every curve record.
pub fn family_records(fam: &FamilySpec, n: &BigInt) -> Result<(Enumeration, Vec<CurveRecord>)> {
    let en = enum_points(fam, n, fam.delta)?;
    let recs = curve_records(fam, &en.points)?;
    Ok((en, recs))
}

/// Per-prime frequencies, moments and the independence diagnostic.
pub fn distribution_experiment(
    fam: &FamilySpec,
    n: &BigInt,
    p_cut: u64,
    min_curves: usize,
) -> Result<(ExperimentSummary, Vec<CurveRecord>)> {
    let (en, recs) = family_records(fam, n)?;
    if recs.len() < min_curves.max(1) {
        return Err(Error::Sample(format!(
            "{} at N = {n}: {} curves < {min_curves}",
            fam.name,
            recs.len()
        )));
    }
    let summary = summarize_distribution(fam, n, p_cut, &recs, en.degenerate)?;
    Ok((summary, recs))
}

/// The distribution summary of a set of records.
pub fn summarize_distribution(
    fam: &FamilySpec,
    n: &BigInt,
    p_cut: u64,
    recs: &[CurveRecord],
    degenerate: usize,
) -> Result<ExperimentSummary> {
    let prof = theoretical_profile(fam, p_cut)?;
    let cnt = recs.len() as f64;
    let mut per_prime = Vec::new();
    let mut model = SumDistribution::point_mass_zero();
    for d in &prof.densities {
        let (dp, dm) = (q_to_f64(&d.d_plus()), q_to_f64(&d.d_minus()));
        let cp = recs.iter().filter(|r| r.exponent_at(d.p) == 1).count() as u64;
        let cm = recs.iter().filter(|r| r.exponent_at(d.p) == -1).count() as u64;
        let (fp, fm) = (cp as f64 / cnt, cm as f64 / cnt);
        let (zp, zm) = (z_score(fp, dp, cnt), z_score(fm, dm, cnt));
        per_prime.push(PrimeFrequency {
            p: d.p,
            d_plus: dp,
            d_minus: dm,
            count_plus: cp,
            count_minus: cm,
            freq_plus: fp,
            freq_minus: fm,
            z_plus: zp,
            z_minus: zm,
            consistent: zp <= 3.0 && zm <= 3.0,
        });
        model = model.convolve(dp, dm);
    }
    let partial: Vec<i64> = recs
        .iter()
        .map(|r| {
            r.local_exponents
                .iter()
                .filter(|(p, _)| *p <= p_cut && !fam.is_excluded(*p))
                .map(|&(_, e)| e as i64)
                .sum()
        })
        .collect();
    let tv = tv_distance(&SumDistribution::empirical(&partial), &model);
    let sums: Vec<i64> = recs.iter().map(|r| r.exponent_sum).collect();
    let mom = moments(&sums)?;
    let c = fam.constants(crate::family::VBranch::Theta)?;
    let l = n.to_f64().unwrap_or(f64::INFINITY).ln().ln();
    let (mu, s2) = (q_to_f64(&c.mu), q_to_f64(&c.sigma_sq));
    let (standardized_mean, variance_ratio) = if l > 0.0 && s2 > 0.0 {
        (Some((mom.mean - mu * l) / (s2 * l).sqrt()), Some(mom.variance / (s2 * l)))
    } else {
        (None, None)
    };
    let consistent = per_prime.iter().filter(|f| f.consistent).count();
    Ok(ExperimentSummary {
        family: fam.name.clone(),
        n: n.to_string(),
        curve_count: recs.len(),
        degenerate,
        log_log_n: l,
        mu: fmt_q(&c.mu),
        sigma_sq: fmt_q(&c.sigma_sq),
        moments: mom,
        standardized_mean,
        variance_ratio,
        p_cut,
        consistent_fraction: if per_prime.is_empty() {
            1.0
        } else {
            consistent as f64 / per_prime.len() as f64
        },
        per_prime,
        tv_distance: tv,
        slope_plus: prof.slope_plus,
        slope_minus: prof.slope_minus,
    })
}

/// Exact average of `ℓ^{k·s}` over the curves, next to `ρ(k)`.
#[derive(Clone, Debug, Serialize)]
pub struct AveragePower {
    pub k: u32,
    pub curve_count: usize,
    pub average: String,
    pub average_f64: f64,
    pub rho_k: String,
    /// `(log N)^{ρ(k)}`, the growth rate of the lower bound.
    pub log_n_power: f64,
}

/// `Σ ℓ^{k·s} / #curves` from precomputed records.
pub fn average_power_of(
    c: &FamilyConstants,
    ell: u64,
    n: &BigInt,
    recs: &[CurveRecord],
    k: u32,
) -> Result<AveragePower> {
    if k == 0 {
        return Err(Error::Domain("k must be ≥ 1".into()));
    }
    if recs.is_empty() {
        return Err(Error::Sample("no curves".into()));
    }
    let base = BigInt::from(ell).pow(k);
    let mut total = Q::zero();
    for r in recs {
        let e = r.exponent_sum.unsigned_abs() as usize;
        let v = num_traits::pow(base.clone(), e);
        total += if r.exponent_sum >= 0 {
            Q::from_integer(v)
        } else {
            Q::new(BigInt::one(), v)
        };
    }
    let avg = total / Q::from_integer(BigInt::from(recs.len()));
    let rho = c.rho(k);
    Ok(AveragePower {
        k,
        curve_count: recs.len(),
        average: fmt_q(&avg),
        average_f64: q_to_f64(&avg),
        log_n_power: n.to_f64().unwrap_or(f64::INFINITY).ln().powf(q_to_f64(&rho)),
        rho_k: fmt_q(&rho),
    })
}

/// `Σ ℓ^{k·s} / #curves` over the family at height `n`.
pub fn average_power(fam: &FamilySpec, n: &BigInt, k: u32) -> Result<AveragePower> {
    let (_, recs) = family_records(fam, n)?;
    let c = fam.constants(crate::family::VBranch::Theta)?;
    average_power_of(&c, fam.ell, n, &recs, k)
}

/// Curves with `s ≥ A·log log N`.
#[derive(Clone, Debug, Serialize)]
pub struct TailCount {
    pub a: String,
    pub threshold: f64,
    pub count: usize,
    pub curve_count: usize,
    pub ratio: f64,
    /// Exponent `δ(A)` of the lower bound `(log N)^{−δ(A)}` (when `c₊ > 0`).
    pub delta: Option<String>,
}

/// Tail count from precomputed records.
pub fn tail_count_of(c: &FamilyConstants, n: &BigInt, recs: &[CurveRecord], a: &Q) -> Result<TailCount> {
    if n < &BigInt::from(16) {
        return Err(Error::Domain("N must be ≥ 16".into()));
    }
    let threshold = q_to_f64(a) * n.to_f64().unwrap_or(f64::INFINITY).ln().ln();
    let count = recs.iter().filter(|r| r.exponent_sum as f64 >= threshold).count();
    Ok(TailCount {
        a: fmt_q(a),
        threshold,
        count,
        curve_count: recs.len(),
        ratio: if recs.is_empty() {
            0.0
        } else {
            count as f64 / recs.len() as f64
        },
        delta: delta_of_a(c, a).ok().map(|d| fmt_q(&d)),
    })
}

/// Tail count over the family at height `n`.
pub fn tail_count(fam: &FamilySpec, n: &BigInt, a: &Q) -> Result<TailCount> {
    let (_, recs) = family_records(fam, n)?;
    let c = fam.constants(crate::family::VBranch::Theta)?;
    tail_count_of(&c, n, &recs, a)
}

/// Per-prime tallies of exponents for a quick look at the data.
pub fn exponent_histogram(recs: &[CurveRecord]) -> BTreeMap<i64, usize> {
    let mut h = BTreeMap::new();
    for r in recs {
        *h.entry(r.exponent_sum).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::builtin_family;

    #[test]
    fn z5_unit_point() {
        let fam = builtin_family("z5").unwrap();
        assert_eq!(local_exponent(&fam, 1, 1, 11), LocalExponent::Value(1));
        assert_eq!(oracle_cross_check(&fam, 1, 1, 11).unwrap(), OracleCheck::Agree { exponent: 1 });
    }

    #[test]
    fn good_reduction_is_zero() {
        let fam = builtin_family("z5").unwrap();
        assert_eq!(local_exponent(&fam, 1, 1, 13), LocalExponent::Value(0));
        assert_eq!(local_exponent(&fam, 1, 1, 5), LocalExponent::Excluded(ExclusionReason::BadPrime));
    }

    #[test]
    fn moments_of_symmetric_sample() {
        let m = moments(&[-1, 0, 1, 0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 0.5);
        assert_eq!(m.skewness, Some(0.0));
        assert!(moments(&[2, 2]).unwrap().skewness.is_none());
        assert!(moments(&[]).is_err());
    }

    #[test]
    fn convolution_and_tv() {
        let d = SumDistribution::point_mass_zero().convolve(0.5, 0.5);
        assert_eq!(d.prob(1), 0.5);
        assert_eq!(d.prob(0), 0.0);
        let e = SumDistribution::empirical(&[1, -1]);
        assert!(tv_distance(&d, &e) < 1e-15);
        let z = SumDistribution::point_mass_zero();
        assert!((tv_distance(&d, &z) - 1.0).abs() < 1e-15);
    }
}
