//! The constants `θ, u±, v±, c±, μ, σ², ρ(k), δ(A)` attached to a split
//! discriminant.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::qpoly::{int_coeffs, QPoly};
use crate::algebra::rational::{fmt_q, is_rational_square, q, qf, qi, Q};
use crate::algebra::whom::{multiplicity, WHomPoly};
use crate::arith::{factor_integer, is_square_in_quadratic_field};
use crate::error::{Error, Result};

use super::chebotarev::qr_root_average;
use super::split::DiscSplit;

/// Prime bound for the empirical estimate of `θ` on factors of degree `> 2`.
pub const CHEBOTAREV_X: u64 = 1_000_000;
/// Minimal distance of the empirical `θ̂` from the midpoint `3/4`.
pub const CHEBOTAREV_MARGIN: f64 = 0.1;

/// How `θ` of a factor was decided.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThetaProvenance {
    /// Root in ℚ (or at infinity): a rational square test.
    ExactRational,
    /// Root in a quadratic field ℚ(√d): a square test in that field.
    ExactQuadratic { d: String },
    /// Average number of roots mod `p` with `(6g|p) = 1`, `p ≤ x`.
    EmpiricalChebotarev { x: u64, estimate: f64, margin: f64 },
}

/// Which reading of `v(R)` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VBranch {
    /// `v(R) = Σ θ` over the irreducible factors (reproduces the reference rows).
    Theta,
    /// `v(R) = u(R)/2` unconditionally.
    HalfU,
    /// `u(R)/2` when the weighted degree of `B` is odd, `Σ θ` otherwise.
    DefinitionParity,
}

impl std::str::FromStr for VBranch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(VBranch::Theta),
            "half-u" => Ok(VBranch::HalfU),
            "definition" => Ok(VBranch::DefinitionParity),
            _ => Err(Error::Parse(format!("unknown v-branch {s:?}"))),
        }
    }
}

/// Which side of the split a factor lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// `θ` of one irreducible factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorTheta {
    pub side: Side,
    pub factor: WHomPoly,
    pub multiplicity: u32,
    pub theta: Q,
    pub provenance: ThetaProvenance,
}

/// All constants for one family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyConstants {
    pub ell: u64,
    pub branch: VBranch,
    pub u_plus: u32,
    pub u_minus: u32,
    pub u_plus1: u32,
    pub u_plus2: u32,
    pub u_minus1: u32,
    pub u_minus2: u32,
    pub v_plus: Q,
    pub v_minus: Q,
    pub v_plus2: Q,
    pub v_minus2: Q,
    pub thetas: Vec<FactorTheta>,
    pub c_plus: Q,
    pub c_minus: Q,
    pub mu: Q,
    pub sigma_sq: Q,
}

impl FamilyConstants {
    /// `ρ(k)` for these constants.
    pub fn rho(&self, k: u32) -> Q {
        rho_exponent(self, self.ell, k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let th: Vec<serde_json::Value> = self
            .thetas
            .iter()
            .map(|t| {
                json!({
                    "side": t.side,
                    "factor": t.factor.format(),
                    "multiplicity": t.multiplicity,
                    "theta": fmt_q(&t.theta),
                    "provenance": t.provenance,
                })
            })
            .collect();
        json!({
            "v_branch": self.branch,
            "u_plus": self.u_plus, "u_minus": self.u_minus,
            "u_plus1": self.u_plus1, "u_plus2": self.u_plus2,
            "u_minus1": self.u_minus1, "u_minus2": self.u_minus2,
            "v_plus": fmt_q(&self.v_plus), "v_minus": fmt_q(&self.v_minus),
            "v_plus2": fmt_q(&self.v_plus2), "v_minus2": fmt_q(&self.v_minus2),
            "c_plus": fmt_q(&self.c_plus), "c_minus": fmt_q(&self.c_minus),
            "mu": fmt_q(&self.mu), "sigma_sq": fmt_q(&self.sigma_sq),
            "rho_1": fmt_q(&self.rho(1)), "rho_2": fmt_q(&self.rho(2)),
            "thetas": th,
        })
    }
}

/// Splits `n = s²·d` with `d` squarefree (sign kept in `d`).
fn squarefree_split(n: &BigInt) -> Result<(BigInt, BigInt)> {
    let fac = factor_integer(n)?;
    let mut s = BigInt::one();
    let mut d = BigInt::from(fac.sign);
    for (p, e) in fac.factors {
        s *= num_traits::pow(p.clone(), (e / 2) as usize);
        if e % 2 == 1 {
            d *= p;
        }
    }
    Ok((s, d))
}

/// `θ(R)` for an irreducible factor `R` of `D₊D₋`: `1` when `6B(α)` is a
/// square in the field generated by a zero `α` of `R`, `1/2` otherwise.
///
/// The zero is taken with representative `(t₀, 1)`, or `(1, 0)` for `R = y`.
pub fn theta_of_factor(b: &WHomPoly, r: &WHomPoly) -> Result<(Q, ThetaProvenance)> {
    if multiplicity(b, r) > 0 {
        return Err(Error::Domain(format!("{r} divides B")));
    }
    let rp = r.dehomogenize();
    let half = qf(1, 2);
    let decide = |sq: bool| if sq { q(1) } else { half.clone() };
    if r.y_multiplicity() > 0 {
        // Zero at [1 : 0].
        let v = b.eval_q(&q(1), &q(0)) * q(6);
        return Ok((decide(is_rational_square(&v)), ThetaProvenance::ExactRational));
    }
    let g = b.dehomogenize();
    match rp.degree() {
        Some(1) => {
            let t0 = -rp.coeff(0) / rp.coeff(1);
            let v = g.eval(&t0) * q(6);
            Ok((decide(is_rational_square(&v)), ThetaProvenance::ExactRational))
        }
        Some(2) => {
            // t = (−c₁ + s√d)/(2c₂) with c₁² − 4c₀c₂ = s²d.
            let ints = int_coeffs(rp).expect("integral factor");
            let (c0, c1, c2) = (&ints[0], &ints[1], &ints[2]);
            let disc: BigInt = c1 * c1 - BigInt::from(4) * c0 * c2;
            let (s, d) = squarefree_split(&disc)?;
            let red = g.rem(rp).expect("nonzero divisor");
            let (p0, p1) = (red.coeff(0), red.coeff(1));
            let two_c2 = qi(c2) * q(2);
            let re = (&p0 - &p1 * qi(c1) / &two_c2) * q(6);
            let im = (&p1 * qi(&s) / &two_c2) * q(6);
            let sq = is_square_in_quadratic_field(&d, &re, &im)?;
            Ok((decide(sq), ThetaProvenance::ExactQuadratic { d: d.to_string() }))
        }
        _ => {
            let est = qr_root_average(rp, g, CHEBOTAREV_X)?;
            let margin = (est - 0.75).abs();
            if margin < CHEBOTAREV_MARGIN {
                return Err(Error::LowConfidence(format!(
                    "θ̂ = {est:.4} for {r} is within {CHEBOTAREV_MARGIN} of 3/4"
                )));
            }
            let theta = if est > 0.75 { q(1) } else { half };
            Ok((
                theta,
                ThetaProvenance::EmpiricalChebotarev {
                    x: CHEBOTAREV_X,
                    estimate: est,
                    margin,
                },
            ))
        }
    }
}

/// `u`, `u/2`-or-`Σθ` contributions from a factor list.
fn side_values(
    fs: &[(WHomPoly, u32)],
    thetas: &[FactorTheta],
    side: Side,
    parity: Option<bool>,
    use_half: bool,
) -> (u32, Q) {
    let mut u = 0;
    let mut v = Q::zero();
    for (p, e) in fs {
        if let Some(odd) = parity {
            if (e % 2 == 1) != odd {
                continue;
            }
        }
        u += 1;
        if use_half {
            v += qf(1, 2);
        } else {
            let t = thetas
                .iter()
                .find(|t| t.side == side && &t.factor == p)
                .expect("θ computed for every factor");
            v += &t.theta;
        }
    }
    (u, v)
}

/// `u±`, `v±`, the parity-split values, `c±`, `μ`, `σ²` under a v-branch.
pub fn family_constants(b: &WHomPoly, split: &DiscSplit, branch: VBranch) -> Result<FamilyConstants> {
    let mut thetas = Vec::new();
    for (side, fs) in [(Side::Plus, &split.plus_factors), (Side::Minus, &split.minus_factors)] {
        for (p, e) in fs {
            let (theta, provenance) = theta_of_factor(b, p)?;
            thetas.push(FactorTheta {
                side,
                factor: p.clone(),
                multiplicity: *e,
                theta,
                provenance,
            });
        }
    }
    let b_odd = b.weighted_degree() % 2 == 1;
    let use_half = match branch {
        VBranch::Theta => false,
        VBranch::HalfU => true,
        VBranch::DefinitionParity => b_odd,
    };
    let (u_plus, v_plus) = side_values(&split.plus_factors, &thetas, Side::Plus, None, use_half);
    let (u_minus, v_minus) = side_values(&split.minus_factors, &thetas, Side::Minus, None, use_half);
    let (u_plus1, _) = side_values(&split.plus_factors, &thetas, Side::Plus, Some(true), use_half);
    let (u_plus2, v_plus2) = side_values(&split.plus_factors, &thetas, Side::Plus, Some(false), use_half);
    let (u_minus1, _) = side_values(&split.minus_factors, &thetas, Side::Minus, Some(true), use_half);
    let (u_minus2, v_minus2) =
        side_values(&split.minus_factors, &thetas, Side::Minus, Some(false), use_half);
    let (c_plus, c_minus) = if split.ell >= 3 {
        (v_plus.clone(), v_minus.clone())
    } else {
        (q(u_plus1 as i64) + &v_plus2, q(u_minus1 as i64) + &v_minus2)
    };
    Ok(FamilyConstants {
        ell: split.ell,
        branch,
        u_plus,
        u_minus,
        u_plus1,
        u_plus2,
        u_minus1,
        u_minus2,
        v_plus,
        v_minus,
        v_plus2,
        v_minus2,
        thetas,
        mu: &c_plus - &c_minus,
        sigma_sq: &c_plus + &c_minus,
        c_plus,
        c_minus,
    })
}

/// `ρ(k) = (ℓᵏ − 1)c₊ − (1 − ℓ⁻ᵏ)c₋`.
pub fn rho_exponent(c: &FamilyConstants, ell: u64, k: u32) -> Q {
    let lk = qi(&num_traits::pow(BigInt::from(ell), k as usize));
    (&lk - q(1)) * &c.c_plus - (q(1) - q(1) / &lk) * &c.c_minus
}

/// `δ(A) = (α−1)²c₊ + 2(1 − α⁻¹)c₋` with `α = 1 + (A + c₋)/c₊`.
pub fn delta_of_a(c: &FamilyConstants, a: &Q) -> Result<Q> {
    delta_from_c(&c.c_plus, &c.c_minus, a)
}

/// [`delta_of_a`] from bare `c±`.
pub fn delta_from_c(c_plus: &Q, c_minus: &Q, a: &Q) -> Result<Q> {
    if !c_plus.is_positive() {
        return Err(Error::Domain("δ(A) needs c₊ > 0".into()));
    }
    let alpha = q(1) + (a + c_minus) / c_plus;
    let am1 = &alpha - q(1);
    Ok(&am1 * &am1 * c_plus + q(2) * (q(1) - q(1) / &alpha) * c_minus)
}

/// Integer coefficients of `P(t, 1)` for a factor (used by the estimators).
pub fn factor_int_poly(p: &WHomPoly) -> QPoly {
    p.dehomogenize().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(cp: Q, cm: Q, ell: u64) -> FamilyConstants {
        FamilyConstants {
            ell,
            branch: VBranch::Theta,
            u_plus: 0,
            u_minus: 0,
            u_plus1: 0,
            u_plus2: 0,
            u_minus1: 0,
            u_minus2: 0,
            v_plus: cp.clone(),
            v_minus: cm.clone(),
            v_plus2: Q::zero(),
            v_minus2: Q::zero(),
            thetas: vec![],
            mu: &cp - &cm,
            sigma_sq: &cp + &cm,
            c_plus: cp,
            c_minus: cm,
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_exponent(&consts(qf(1, 2), q(1), 3), 3, 1), qf(1, 3));
        assert_eq!(rho_exponent(&consts(q(0), q(0), 5), 5, 3), q(0));
        assert_eq!(rho_exponent(&consts(q(1), q(2), 2), 2, 2), qf(3, 2));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_from_c(&q(1), &q(0), &q(1)).unwrap(), q(1));
        assert_eq!(delta_from_c(&qf(1, 2), &q(2), &q(1)).unwrap(), qf(150, 7));
        assert!(delta_from_c(&q(0), &q(1), &q(1)).is_err());
        let tiny = delta_from_c(&q(1), &q(0), &qf(1, 1_000_000)).unwrap();
        assert!(crate::algebra::rational::q_to_f64(&tiny) < 1e-11);
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("theta".parse::<VBranch>().unwrap(), VBranch::Theta);
        assert_eq!("half-u".parse::<VBranch>().unwrap(), VBranch::HalfU);
        assert_eq!("definition".parse::<VBranch>().unwrap(), VBranch::DefinitionParity);
        assert!("x".parse::<VBranch>().is_err());
    }
}
