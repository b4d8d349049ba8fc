//! Short Weierstrass models `y² = x³ + Ax + B` over ℚ: naive heights,
//! minimal models at primes `p > 3`, reduction types, Tamagawa numbers at
//! multiplicative primes and point counts over 𝔽_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::rational::Q;
use crate::arith::{factor_integer, jacobi_u64, legendre_unchecked, valuation};
use crate::error::{Error, Result};

/// `y² = x³ + Ax + B` with integer coefficients and cached `4A³ + 27B²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModel {
    pub a: BigInt,
    pub b: BigInt,
    disc: BigInt,
}

/// Serialized form: decimal strings.
#[derive(Serialize, Deserialize)]
struct CurveModelJson {
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
}

impl CurveModel {
    pub fn new(a: BigInt, b: BigInt) -> Self {
        let disc = disc_of(&a, &b);
        CurveModel { a, b, disc }
    }

    pub fn from_i64(a: i64, b: i64) -> Self {
        Self::new(BigInt::from(a), BigInt::from(b))
    }

    /// `4A³ + 27B²` (the normalization used throughout; it differs from the
    /// usual discriminant by the unit-free factor `−16`).
    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn is_singular(&self) -> bool {
        self.disc.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CurveModelJson {
            a: self.a.to_string(),
            b: self.b.to_string(),
        })
        .expect("plain struct serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: CurveModelJson = serde_json::from_value(v.clone())?;
        let p = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
        };
        Ok(Self::new(p(&j.a)?, p(&j.b)?))
    }
}

/// `4A³ + 27B²`.
pub fn disc_of(a: &BigInt, b: &BigInt) -> BigInt {
    a * a * a * 4u32 + b * b * 27u32
}

/// Kind of reduction at a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionKind {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

/// Reduction kind together with `v_p` of the minimal discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionType {
    pub kind: ReductionKind,
    pub v_disc: u32,
}

/// Local data at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalData {
    pub p: u64,
    pub reduction: ReductionType,
    /// `None` when not computed (additive reduction).
    pub tamagawa: Option<u32>,
}

/// Largest `d ≥ 1` with `d¹² | gcd(A³, B²)`.
///
/// Equivalently `∏ p^{min(⌊v_p(A)/4⌋, ⌊v_p(B)/6⌋)}`, with the convention
/// `v_p(0) = ∞`.
pub fn m_of(a: &BigInt, b: &BigInt) -> Result<BigInt> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::Domain("m(A,B) undefined for A = B = 0".into()));
    }
    let g = a.gcd(b);
    let mut d = BigInt::one();
    if g.is_one() {
        return Ok(d);
    }
    for (p, _) in factor_integer(&g)?.factors {
        let pu = p.to_u64().expect("prime fits u64 at the sizes in scope");
        let va = valuation(a, pu);
        let vb = valuation(b, pu);
        let k = (va / 4).min(vb / 6);
        d *= num_traits::pow(p, k as usize);
    }
    Ok(d)
}

/// `(H, H₀)` with `H₀ = max(4|A|³, 27B²)` and `H = H₀ / m(A,B)¹²`.
///
/// `H` is returned as an exact rational; it is always an integer because
/// `m¹²` divides both `A³` and `B²`.
pub fn naive_height(a: &BigInt, b: &BigInt) -> Result<(Q, BigInt)> {
    let m = m_of(a, b)?;
    let h0 = height0(a, b);
    let h = Q::new(h0.clone(), num_traits::pow(m, 12));
    Ok((h, h0))
}

/// `max(4|A|³, 27B²)`.
pub fn height0(a: &BigInt, b: &BigInt) -> BigInt {
    let x = a.abs().pow(3) * 4u32;
    let y = b * b * 27u32;
    x.max(y)
}

/// Strips the largest `p⁴ᵏ | A`, `p⁶ᵏ | B` (for `p > 3`).
pub fn minimal_at_p(e: &CurveModel, p: u64) -> CurveModel {
    let va = valuation(&e.a, p);
    let vb = valuation(&e.b, p);
    let k = (va / 4).min(vb / 6);
    if k == 0 {
        return e.clone();
    }
    let pb = BigInt::from(p);
    let a = &e.a / num_traits::pow(pb.clone(), 4 * k as usize);
    let b = &e.b / num_traits::pow(pb, 6 * k as usize);
    let out = CurveModel::new(a, b);
    debug_assert!(valuation(&out.a, p) < 4 || valuation(&out.b, p) < 6);
    out
}

/// Reduction type at `p > 3`, classified on the minimal model.
pub fn reduction_type(e: &CurveModel, p: u64) -> Result<ReductionType> {
    if p <= 3 {
        return Err(Error::UnsupportedPrime(p));
    }
    if e.is_singular() {
        return Err(Error::Domain("singular model".into()));
    }
    let m = minimal_at_p(e, p);
    let v = valuation(m.disc(), p);
    let kind = if v == 0 {
        ReductionKind::Good
    } else if valuation(&m.a, p) > 0 {
        ReductionKind::Additive
    } else {
        let sixb: BigInt = &m.b * 6u32;
        if legendre_unchecked(&sixb, p) == 1 {
            ReductionKind::SplitMultiplicative
        } else {
            ReductionKind::NonsplitMultiplicative
        }
    };
    Ok(ReductionType { kind, v_disc: v })
}

/// Tamagawa number at a multiplicative prime `p > 3`.
pub fn tamagawa_mult(e: &CurveModel, p: u64) -> Result<LocalData> {
    let r = reduction_type(e, p)?;
    let c = match r.kind {
        ReductionKind::SplitMultiplicative => r.v_disc,
        ReductionKind::NonsplitMultiplicative => {
            if r.v_disc % 2 == 0 {
                2
            } else {
                1
            }
        }
        other => {
            return Err(Error::WrongReduction(format!(
                "{other:?} reduction at {p}"
            )))
        }
    };
    Ok(LocalData {
        p,
        reduction: r,
        tamagawa: Some(c),
    })
}

/// Local data at any prime `p > 3` (good ⇒ `c_p = 1`, additive ⇒ unknown).
pub fn local_data(e: &CurveModel, p: u64) -> Result<LocalData> {
    let r = reduction_type(e, p)?;
    match r.kind {
        ReductionKind::Good => Ok(LocalData {
            p,
            reduction: r,
            tamagawa: Some(1),
        }),
        ReductionKind::Additive => Ok(LocalData {
            p,
            reduction: r,
            tamagawa: None,
        }),
        _ => tamagawa_mult(e, p),
    }
}

/// `#E(𝔽_p)` for a prime `p > 3` of good reduction.
pub fn count_points_mod_p(e: &CurveModel, p: u64) -> Result<u64> {
    if p <= 3 {
        return Err(Error::UnsupportedPrime(p));
    }
    let pb = BigInt::from(p);
    if (e.disc() % &pb).is_zero() {
        return Err(Error::Domain(format!("bad reduction at {p}")));
    }
    let a = e.a.mod_floor(&pb).to_u64().unwrap();
    let b = e.b.mod_floor(&pb).to_u64().unwrap();
    Ok(count_points_raw(a, b, p))
}

/// Point count for reduced coefficients (no validation).
pub fn count_points_raw(a: u64, b: u64, p: u64) -> u64 {
    let mut s: i64 = 0;
    for x in 0..p {
        let x128 = x as u128;
        let pp = p as u128;
        let v = ((x128 * x128 % pp * x128 + a as u128 * x128 + b as u128) % pp) as u64;
        s += jacobi_u64(v, p) as i64;
    }
    (p as i64 + 1 + s) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::q;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn m_examples() {
        assert_eq!(m_of(&bi(16), &bi(64)).unwrap(), bi(2));
        assert_eq!(m_of(&bi(-432), &bi(8208)).unwrap(), bi(1));
        assert_eq!(m_of(&bi(1), &bi(1)).unwrap(), bi(1));
        assert_eq!(m_of(&bi(0), &bi(64)).unwrap(), bi(2));
        assert!(m_of(&bi(0), &bi(0)).is_err());
    }

    #[test]
    fn height_examples() {
        assert_eq!(naive_height(&bi(-1), &bi(0)).unwrap(), (q(4), bi(4)));
        assert_eq!(
            naive_height(&bi(-432), &bi(8208)).unwrap(),
            (q(1819024128), bi(1819024128))
        );
        assert_eq!(naive_height(&bi(16), &bi(64)).unwrap(), (q(27), bi(110592)));
    }

    #[test]
    fn minimal_models() {
        let p = 5u64;
        let e = CurveModel::new(bi(625), bi(15625));
        assert_eq!(minimal_at_p(&e, p), CurveModel::from_i64(1, 1));
        let e = CurveModel::from_i64(-432, 8208);
        assert_eq!(minimal_at_p(&e, p), e);
        let e = CurveModel::from_i64(16 * 625, 64 * 15625);
        assert_eq!(minimal_at_p(&e, p), CurveModel::from_i64(16, 64));
    }

    #[test]
    fn reduction_examples() {
        let e = CurveModel::from_i64(-432, 8208);
        let r = reduction_type(&e, 11).unwrap();
        assert_eq!(r.kind, ReductionKind::SplitMultiplicative);
        assert_eq!(r.v_disc, 1);
        let e = CurveModel::from_i64(1, 1);
        let r = reduction_type(&e, 31).unwrap();
        assert_eq!(r.kind, ReductionKind::NonsplitMultiplicative);
        assert_eq!(reduction_type(&e, 5).unwrap().kind, ReductionKind::Good);
        assert_eq!(reduction_type(&e, 3), Err(Error::UnsupportedPrime(3)));
        assert!(tamagawa_mult(&e, 5).is_err());
    }

    #[test]
    fn point_counts() {
        assert_eq!(count_points_mod_p(&CurveModel::from_i64(-1, 0), 5).unwrap(), 8);
        assert_eq!(count_points_mod_p(&CurveModel::from_i64(4, 0), 5).unwrap(), 8);
        assert_eq!(count_points_mod_p(&CurveModel::from_i64(0, 1), 5).unwrap(), 6);
        assert!(count_points_mod_p(&CurveModel::from_i64(1, 1), 31).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = CurveModel::from_i64(-432, 8208);
        let v = e.to_json();
        assert_eq!(v["A"], "-432");
        assert_eq!(CurveModel::from_json(&v).unwrap(), e);
    }
}
