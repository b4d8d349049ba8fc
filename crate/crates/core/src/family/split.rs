//! Splitting the discriminants of an isogenous pair into the parts that
//! grow (`D₊`), shrink (`D₋`) or stay additive (`T`, `T′`) under the isogeny.

use serde_json::json;

use crate::algebra::rational::{fmt_q, Q};
use crate::algebra::whom::{multiplicity, whom_factor, WHomPoly};
use crate::error::{Error, Result};
use crate::isogeny::disc_poly;

/// `Δ = c′·T·D₊·D₋^ℓ` and `Δ′ = c·T′·D₊^ℓ·D₋`, with the factor lists.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscSplit {
    pub ell: u64,
    pub cprime: Q,
    pub c: Q,
    pub t: WHomPoly,
    pub t_prime: WHomPoly,
    pub d_plus: WHomPoly,
    pub d_minus: WHomPoly,
    /// Product of the irreducible factors of `D₊` with odd multiplicity.
    pub d_plus1: WHomPoly,
    /// Product of the irreducible factors of `D₊` with even multiplicity.
    pub d_plus2: WHomPoly,
    pub d_minus1: WHomPoly,
    pub d_minus2: WHomPoly,
    /// Irreducible factors of `D₊` with their multiplicity in `D₊`.
    pub plus_factors: Vec<(WHomPoly, u32)>,
    pub minus_factors: Vec<(WHomPoly, u32)>,
    /// Irreducible factors of `T` with multiplicities in `Δ` and `Δ′`.
    pub t_factors: Vec<(WHomPoly, u32, u32)>,
    /// Product of the distinct irreducible factors of `D₊·D₋`.
    pub radical: WHomPoly,
}

/// Product of `Pᵉ` over a factor list.
pub fn product(tau: u32, factors: impl IntoIterator<Item = (WHomPoly, u32)>) -> WHomPoly {
    factors
        .into_iter()
        .fold(WHomPoly::constant(tau, Q::from_integer(1.into())), |acc, (p, e)| {
            acc.mul(&p.pow(e))
        })
}

/// `4A³ + 27B²` as a weighted-homogeneous polynomial of weighted degree `6ς`.
pub fn disc_whom(a: &WHomPoly, b: &WHomPoly) -> WHomPoly {
    let w = 3 * a.weighted_degree();
    debug_assert_eq!(w, 2 * b.weighted_degree());
    WHomPoly::new(a.tau(), w, disc_poly(a.dehomogenize(), b.dehomogenize()))
        .expect("discriminant has the right weighted degree")
}

/// Classifies every irreducible factor of `Δ`, `Δ′` and assembles the split.
///
/// A factor dividing both `A` and `B` goes to `T`/`T′`; otherwise its
/// multiplicities `e` in `Δ` and `e′` in `Δ′` must satisfy `e′ = ℓe`
/// (factor of `D₊` with multiplicity `e`) or `e = ℓe′` (factor of `D₋` with
/// multiplicity `e′`).  Anything else is a classification error.
pub fn split_discriminant(
    a: &WHomPoly,
    b: &WHomPoly,
    a_prime: &WHomPoly,
    b_prime: &WHomPoly,
    ell: u64,
) -> Result<DiscSplit> {
    let tau = a.tau();
    let disc = disc_whom(a, b);
    let disc_p = disc_whom(a_prime, b_prime);
    if disc.is_zero() || disc_p.is_zero() {
        return Err(Error::Domain("vanishing discriminant".into()));
    }
    let fd = whom_factor(&disc)?;
    let fdp = whom_factor(&disc_p)?;
    let mut all: Vec<WHomPoly> = fd.factors.iter().map(|(p, _)| p.clone()).collect();
    for (p, _) in &fdp.factors {
        if !all.contains(p) {
            all.push(p.clone());
        }
    }
    let ell32 = u32::try_from(ell).map_err(|_| Error::Domain("ℓ too large".into()))?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut tf = Vec::new();
    for p in all {
        let e = multiplicity(&disc, &p);
        let ep = multiplicity(&disc_p, &p);
        let in_ab = multiplicity(a, &p) > 0 && multiplicity(b, &p) > 0;
        if in_ab {
            if multiplicity(a, &p) >= 4 && multiplicity(b, &p) >= 6 {
                return Err(Error::Classification(format!(
                    "{p}: P⁴ | A and P⁶ | B (non-minimal generic model)"
                )));
            }
            tf.push((p, e, ep));
        } else if ep == ell32 * e {
            plus.push((p, e));
        } else if e == ell32 * ep {
            minus.push((p, ep));
        } else {
            return Err(Error::Classification(format!(
                "{p}: multiplicity {e} in Δ and {ep} in Δ′ fit no allowed case"
            )));
        }
    }
    // The additive parts of both curves must involve the same primes.
    let common = |x: &WHomPoly, y: &WHomPoly| -> Result<Vec<WHomPoly>> {
        Ok(whom_factor(x)?
            .factors
            .into_iter()
            .map(|(p, _)| p)
            .filter(|p| multiplicity(y, p) > 0)
            .collect())
    };
    let mut g1 = common(a, b)?;
    let mut g2 = common(a_prime, b_prime)?;
    let mut tset: Vec<WHomPoly> = tf.iter().map(|(p, _, _)| p.clone()).collect();
    let key = |p: &WHomPoly| p.to_json().to_string();
    g1.sort_by_key(key);
    g2.sort_by_key(key);
    tset.sort_by_key(key);
    if g1 != tset || g2 != tset {
        return Err(Error::Classification(
            "common factors of (A,B), (A′,B′) and T disagree".into(),
        ));
    }

    let t = product(tau, tf.iter().map(|(p, e, _)| (p.clone(), *e)));
    let t_prime = product(tau, tf.iter().map(|(p, _, e)| (p.clone(), *e)));
    let d_plus = product(tau, plus.iter().cloned());
    let d_minus = product(tau, minus.iter().cloned());
    let rhs = t.mul(&d_plus).mul(&d_minus.pow(ell32));
    let rhs_p = t_prime.mul(&d_plus.pow(ell32)).mul(&d_minus);
    let ratio = |lhs: &WHomPoly, r: &WHomPoly| -> Result<Q> {
        if lhs.weighted_degree() != r.weighted_degree() {
            return Err(Error::Classification(format!(
                "weighted degrees differ: {} vs {}",
                lhs.weighted_degree(),
                r.weighted_degree()
            )));
        }
        let c = lhs.dehomogenize().lc().expect("nonzero") / r.dehomogenize().lc().expect("nonzero");
        if r.scale(&c) != *lhs {
            return Err(Error::Classification("discriminant identity fails".into()));
        }
        Ok(c)
    };
    let cprime = ratio(&disc, &rhs)?;
    let c = ratio(&disc_p, &rhs_p)?;
    let parity = |fs: &[(WHomPoly, u32)], odd: bool| {
        product(
            tau,
            fs.iter()
                .filter(|(_, e)| (e % 2 == 1) == odd)
                .map(|(p, _)| (p.clone(), 1)),
        )
    };
    let radical = product(tau, plus.iter().chain(&minus).map(|(p, _)| (p.clone(), 1)));
    Ok(DiscSplit {
        ell,
        cprime,
        c,
        d_plus1: parity(&plus, true),
        d_plus2: parity(&plus, false),
        d_minus1: parity(&minus, true),
        d_minus2: parity(&minus, false),
        t,
        t_prime,
        d_plus,
        d_minus,
        plus_factors: plus,
        minus_factors: minus,
        t_factors: tf,
        radical,
    })
}

impl DiscSplit {
    /// Human/JSON report of the split.
    pub fn to_json(&self) -> serde_json::Value {
        let fl = |fs: &[(WHomPoly, u32)]| -> Vec<serde_json::Value> {
            fs.iter()
                .map(|(p, e)| json!({"factor": p.format(), "multiplicity": e}))
                .collect()
        };
        json!({
            "c_prime": fmt_q(&self.cprime),
            "c": fmt_q(&self.c),
            "T": self.t.format(),
            "T_prime": self.t_prime.format(),
            "D_plus": self.d_plus.format(),
            "D_minus": self.d_minus.format(),
            "D_plus_factors": fl(&self.plus_factors),
            "D_minus_factors": fl(&self.minus_factors),
            "D_plus1": self.d_plus1.format(),
            "D_plus2": self.d_plus2.format(),
            "D_minus1": self.d_minus1.format(),
            "D_minus2": self.d_minus2.format(),
        })
    }
}
