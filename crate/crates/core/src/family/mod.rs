//! Families of elliptic curves with a rational `ℓ`-isogeny over ℚ(t):
//! registry, admissibility validation, discriminant splitting and the
//! constants `u±, v±, c±, μ, σ², ρ(k)`.

pub mod chebotarev;
pub mod constants;
pub mod lambda;
pub mod registry;
pub mod split;
pub mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::json;

use crate::algebra::qpoly::{
    count_real_roots, format_poly, int_coeffs, normalize, poly_from_json, poly_gcd, poly_multiplicity,
    squarefree_part, QPoly,
};
use crate::algebra::whom::{whom_factor, whom_from_univariate, WHomPoly};
use crate::algebra::{poly_factor, Q};
use crate::arith::{factor_u64, is_prime_u64};
use crate::error::{Error, Result};
use crate::isogeny::{disc_poly, isogeny_pair, IsogenyPair, KernelSpec};

pub use constants::{
    delta_of_a, family_constants, rho_exponent, theta_of_factor, FamilyConstants, ThetaProvenance, VBranch,
};
pub use registry::{builtin_registry, find_entry, parse_registry, AdmissibilityClass, RegistryEntry};
pub use split::{split_discriminant, DiscSplit};

/// `gcd(f³, g²) = K^r` with `K` squarefree.
#[derive(Clone, Debug)]
pub struct PowerShape {
    pub r: u32,
    /// `U = A³/K^r` and `W = B²/K^r` (coprime forms).
    pub u: WHomPoly,
    pub w: WHomPoly,
    /// `∏ p^{K_p}` with `p^{K_p}` dividing both `U` and `W` at some point of 𝒯.
    pub lambda_uw: Option<BigInt>,
}

/// The common part of `f` and `g` for families with `gcd(f, g) ≠ 1`.
#[derive(Clone, Debug)]
pub struct CommonPart {
    /// Squarefree `K(t) = rad gcd(f, g)`.
    pub k: QPoly,
    pub k_form: WHomPoly,
    /// Cofactors `A₀`, `B₀` of `A`, `B` with every factor of `K` removed.
    pub a_co: WHomPoly,
    pub b_co: WHomPoly,
    /// Present when `gcd(f³, g²)` is a pure power of `K`.
    pub power: Option<PowerShape>,
}

/// A validated family with all derived algebraic data.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub entry: RegistryEntry,
    pub name: String,
    pub ell: u64,
    pub upsilon: u32,
    pub tau: u32,
    pub m: u32,
    pub varsigma: u32,
    pub delta: u32,
    pub class: AdmissibilityClass,
    pub f: QPoly,
    pub g: QPoly,
    pub kernel: KernelSpec,
    pub pair: IsogenyPair,
    pub a: WHomPoly,
    pub b: WHomPoly,
    pub a_prime: WHomPoly,
    pub b_prime: WHomPoly,
    pub disc: WHomPoly,
    pub disc_prime: WHomPoly,
    pub split: DiscSplit,
    pub common: Option<CommonPart>,
    /// `Λ̂` for the coprime classes.
    pub lambda_hat: Option<BigInt>,
    pub lambda_exponents: Vec<(u64, u32)>,
    /// Primes at which local exponents are not evaluated.
    pub excluded_primes: BTreeSet<u64>,
}

fn invalid(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidFamily(format!("{name}: {msg}"))
}

fn deg(p: &QPoly) -> u32 {
    p.degree().unwrap_or(0) as u32
}

/// `y^w·p(x/y^τ)` with an explicit weighted degree.
fn form(tau: u32, w: u32, p: QPoly) -> Result<WHomPoly> {
    WHomPoly::new(tau, w, p)
}

/// The class-independent degree condition and the class conditions.
fn validate(e: &RegistryEntry, f: &QPoly, g: &QPoly) -> Result<()> {
    let n = &e.name;
    if !is_prime_u64(e.ell) {
        return Err(invalid(n, format!("ℓ = {} is not prime", e.ell)));
    }
    if !(1..=2).contains(&e.upsilon) || e.tau == 0 || e.m == 0 {
        return Err(invalid(n, "need υ ∈ {1,2}, τ ≥ 1, m ≥ 1"));
    }
    if e.delta != e.class.delta() {
        return Err(invalid(n, format!("δ = {} does not match class {:?}", e.delta, e.class)));
    }
    if f.is_zero() || g.is_zero() {
        return Err(invalid(n, "f and g must be nonzero"));
    }
    if int_coeffs(f).is_none() || int_coeffs(g).is_none() {
        return Err(invalid(n, "f and g must have integer coefficients"));
    }
    // max{deg f / 2, deg g / 3} = 2m / (υτ)
    let lhs = (3 * deg(f)).max(2 * deg(g)) * e.upsilon * e.tau;
    if lhs != 12 * e.m {
        return Err(invalid(
            n,
            format!(
                "degree condition fails: max(deg f/2, deg g/3) ≠ 2m/(υτ) with deg f = {}, deg g = {}",
                deg(f),
                deg(g)
            ),
        ));
    }
    if e.m != 1 && e.upsilon * e.tau != 1 {
        return Err(invalid(n, "need m = 1 or υτ = 1"));
    }
    let gcd = poly_gcd(f, g)?;
    let coprime = gcd.is_constant();
    let no_common_real = count_real_roots(&gcd) == 0;
    use AdmissibilityClass::*;
    match e.class {
        A1 => {
            if e.upsilon != 1 || !coprime {
                return Err(invalid(n, "class A1 needs υ = 1 and coprime f, g"));
            }
        }
        A2 => {
            if e.upsilon != 2 || !coprime || e.m != 1 {
                return Err(invalid(n, "class A2 needs υ = 2, m = 1 and coprime f, g"));
            }
        }
        A3 => {
            if e.upsilon != 1 || e.tau != 1 || !no_common_real || e.ell < 5 {
                return Err(invalid(
                    n,
                    "class A3 needs υ = τ = 1, ℓ ≥ 5 and no common real roots of f, g",
                ));
            }
            let s = poly_gcd(&f.pow(3), &g.pow(2))?;
            let k = squarefree_part(&s);
            let r = deg(&s) / deg(&k).max(1);
            if deg(&k) == 0 || normalize(&k.pow(r)) != s || ![2, 3, 4, 6].contains(&r) {
                return Err(invalid(n, "gcd(f³, g²) is not K^r with K squarefree and r ∈ {2,3,4,6}"));
            }
            let ds = deg(&s);
            if ds < 4 || ds * (2 + e.m) >= 24 * e.m {
                return Err(invalid(n, format!("deg gcd(f³, g²) = {ds} outside [4, 24m/(2+m))")));
            }
            let disc = disc_poly(f, g);
            for (kf, _) in poly_factor(&k)?.factors {
                if poly_multiplicity(f, &kf) == 2
                    && poly_multiplicity(g, &kf) == 3
                    && poly_multiplicity(&disc, &kf) != 6
                {
                    return Err(invalid(n, "a factor with multiplicities (2, 3) has Δ-multiplicity ≠ 6"));
                }
            }
        }
        A4 => {
            if e.upsilon != 1 || e.tau != 1 || !no_common_real {
                return Err(invalid(n, "class A4 needs υ = τ = 1 and no common real roots of f, g"));
            }
            if e.ell <= 3 && !coprime {
                return Err(invalid(n, "class A4 with ℓ ∈ {2,3} needs coprime f, g"));
            }
        }
    }
    Ok(())
}

/// `p` with every factor it shares with `k` removed.
fn strip_factors(p: &QPoly, k: &QPoly) -> Result<QPoly> {
    let mut cur = p.clone();
    loop {
        let g = poly_gcd(&cur, k)?;
        if g.is_constant() {
            return Ok(cur);
        }
        cur = cur.exact_div(&g).expect("gcd divides");
    }
}

fn common_part(fam: &RegistryEntry, f: &QPoly, g: &QPoly, a: &WHomPoly, b: &WHomPoly) -> Result<Option<CommonPart>> {
    let s = poly_gcd(&f.pow(3), &g.pow(2))?;
    if s.is_constant() {
        return Ok(None);
    }
    let tau = fam.tau;
    let k = squarefree_part(&s);
    let dk = deg(&k);
    let (f0, g0) = (strip_factors(f, &k)?, strip_factors(g, &k)?);
    let a_co = form(tau, a.weighted_degree() - tau * (deg(f) - deg(&f0)), f0)?;
    let b_co = form(tau, b.weighted_degree() - tau * (deg(g) - deg(&g0)), g0)?;
    let r = deg(&s) / dk;
    let power = if normalize(&k.pow(r)) == s {
        let div = |p: &QPoly| p.exact_div(&k.pow(r)).expect("K^r divides");
        let u = form(tau, 3 * a.weighted_degree() - tau * dk * r, div(&f.pow(3)))?;
        let w = form(tau, 2 * b.weighted_degree() - tau * dk * r, div(&g.pow(2)))?;
        let lambda_uw = if fam.class == AdmissibilityClass::A3 {
            Some(lambda::common_power_constant(&u, &w, (1, 1), fam.upsilon, tau)?.0)
        } else {
            None
        };
        Some(PowerShape { r, u, w, lambda_uw })
    } else {
        None
    };
    Ok(Some(CommonPart {
        k_form: WHomPoly::lift(tau, k.clone()),
        k,
        a_co,
        b_co,
        power,
    }))
}

fn ctx(what: &str, e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
        other => other,
    }
}

fn excluded_primes(
    ell: u64,
    split: &DiscSplit,
    lambda_exps: &[(u64, u32)],
    common: Option<&CommonPart>,
) -> Result<BTreeSet<u64>> {
    let mut s: BTreeSet<u64> = factor_u64(6 * ell).into_iter().map(|(p, _)| p).collect();
    s.extend(lambda::rational_primes(&split.c)?);
    s.extend(lambda::rational_primes(&split.cprime)?);
    s.extend(lambda::hom_resultant_primes(&split.d_plus, &split.d_minus).map_err(|e| ctx("D+/D-", e))?);
    if !split.t_factors.is_empty() {
        let rad_t = split::product(split.t.tau(), split.t_factors.iter().map(|(p, _, _)| (p.clone(), 1)));
        s.extend(lambda::hom_resultant_primes(&rad_t, &split.radical).map_err(|e| ctx("T/radical", e))?);
    }
    s.extend(lambda_exps.iter().map(|(p, _)| *p));
    if let Some(c) = common {
        s.extend(lambda::hom_resultant_primes(&c.k_form, &c.a_co.mul(&c.b_co)).map_err(|e| ctx("K/A0B0", e))?);
        s.extend(lambda::hom_resultant_primes(&c.a_co, &c.b_co).map_err(|e| ctx("A0/B0", e))?);
    }
    Ok(s)
}

/// Validates a registry entry and derives every algebraic datum.
pub fn load_family(e: &RegistryEntry) -> Result<FamilySpec> {
    let n = &e.name;
    let f = poly_from_json(&e.f)?;
    let g = poly_from_json(&e.g)?;
    validate(e, &f, &g)?;
    let varsigma = if e.upsilon == 1 { 2 * e.m } else { 1 };
    let kernel = KernelSpec::from_json(&e.kernel)?;
    let pair = isogeny_pair(&f, &g, &kernel, e.ell)?;
    let tau = e.tau;
    let a = whom_from_univariate(&f, tau, varsigma, 2)?;
    let b = whom_from_univariate(&g, tau, varsigma, 3)?;
    let a_prime = whom_from_univariate(&pair.f_prime, tau, varsigma, 2)
        .map_err(|_| invalid(n, "codomain f′ has too large a degree"))?;
    let b_prime = whom_from_univariate(&pair.g_prime, tau, varsigma, 3)
        .map_err(|_| invalid(n, "codomain g′ has too large a degree"))?;
    let split = split_discriminant(&a, &b, &a_prime, &b_prime, e.ell)?;
    let disc = split::disc_whom(&a, &b);
    let disc_prime = split::disc_whom(&a_prime, &b_prime);
    let (lambda_hat, lambda_exponents) = match e.class {
        AdmissibilityClass::A1 | AdmissibilityClass::A2 => {
            let (l, ex) = lambda::common_power_constant(&a, &b, (4, 6), e.upsilon, tau)?;
            (Some(l), ex)
        }
        _ => (None, Vec::new()),
    };
    let common = common_part(e, &f, &g, &a, &b)?;
    let excluded = excluded_primes(e.ell, &split, &lambda_exponents, common.as_ref())?;
    Ok(FamilySpec {
        entry: e.clone(),
        name: e.name.clone(),
        ell: e.ell,
        upsilon: e.upsilon,
        tau,
        m: e.m,
        varsigma,
        delta: e.delta,
        class: e.class,
        f,
        g,
        kernel,
        pair,
        a,
        b,
        a_prime,
        b_prime,
        disc,
        disc_prime,
        split,
        common,
        lambda_hat,
        lambda_exponents,
        excluded_primes: excluded,
    })
}

fn cache() -> &'static Mutex<BTreeMap<String, Arc<FamilySpec>>> {
    static C: OnceLock<Mutex<BTreeMap<String, Arc<FamilySpec>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// A built-in family by name (derived once per process).
pub fn builtin_family(name: &str) -> Result<Arc<FamilySpec>> {
    if let Some(f) = cache().lock().expect("cache lock").get(name) {
        return Ok(f.clone());
    }
    let reg = builtin_registry();
    let fam = Arc::new(load_family(find_entry(&reg, name)?)?);
    cache()
        .lock()
        .expect("cache lock")
        .insert(name.to_string(), fam.clone());
    Ok(fam)
}

impl FamilySpec {
    /// Family constants under a v-branch.
    pub fn constants(&self, branch: VBranch) -> Result<FamilyConstants> {
        family_constants(&self.b, &self.split, branch)
    }

    /// Whether a prime is in the excluded set.
    pub fn is_excluded(&self, p: u64) -> bool {
        self.excluded_primes.contains(&p)
    }

    /// Factorization of `Δ` as text, e.g. `27 * (a + 5*b^3) * (a + 9*b^3)^3`.
    pub fn factored_text(p: &WHomPoly) -> Result<String> {
        let fp = whom_factor(p)?;
        let mut parts = vec![crate::algebra::rational::fmt_q(&fp.content)];
        for (q, e) in &fp.factors {
            let s = if q.terms().len() > 1 {
                format!("({})", q.format())
            } else {
                q.format()
            };
            parts.push(if *e > 1 { format!("{s}^{e}") } else { s });
        }
        Ok(parts.join(" * "))
    }

    /// Report of the derived data (polynomials, split, Λ̂, excluded primes).
    pub fn to_json(&self) -> serde_json::Value {
        let common = self.common.as_ref().map(|c| {
            json!({
                "K": format_poly(&c.k, "t"),
                "r": c.power.as_ref().map(|p| p.r),
                "lambda_UW": c.power.as_ref().and_then(|p| p.lambda_uw.as_ref()).map(|l| l.to_string()),
            })
        });
        json!({
            "name": self.name,
            "label": self.entry.label,
            "ell": self.ell,
            "upsilon": self.upsilon,
            "tau": self.tau,
            "m": self.m,
            "varsigma": self.varsigma,
            "delta": self.delta,
            "class": self.class,
            "f": format_poly(&self.f, "t"),
            "g": format_poly(&self.g, "t"),
            "f_prime": format_poly(&self.pair.f_prime, "t"),
            "g_prime": format_poly(&self.pair.g_prime, "t"),
            "A": self.a.format(),
            "B": self.b.format(),
            "A_prime": self.a_prime.format(),
            "B_prime": self.b_prime.format(),
            "Delta": Self::factored_text(&self.disc).unwrap_or_default(),
            "Delta_prime": Self::factored_text(&self.disc_prime).unwrap_or_default(),
            "deg_Delta": self.disc.weighted_degree(),
            "split": self.split.to_json(),
            "common": common,
            "lambda_hat": self.lambda_hat.as_ref().map(|l| l.to_string()),
            "excluded_primes": self.excluded_primes,
        })
    }

    /// `Λ̂` as a machine integer when it fits.
    pub fn lambda_hat_u64(&self) -> Option<u64> {
        self.lambda_hat.as_ref().and_then(|l| l.to_u64())
    }
}

/// Exact rational from an integer (small helper for reports).
pub fn qint(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtin_families_load() {
        for e in builtin_registry() {
            let fam = load_family(&e).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert_eq!(fam.disc.weighted_degree(), 6 * fam.varsigma, "{}", e.name);
        }
    }

    #[test]
    fn z5_split() {
        let fam = builtin_family("z5").unwrap();
        assert_eq!(fam.split.d_plus.format(), "a^2 + 11*a*b - b^2");
        assert_eq!(fam.split.minus_factors.len(), 2);
    }

    #[test]
    fn degree_condition_rejected() {
        let mut e = find_entry(&builtin_registry(), "z2").unwrap().clone();
        e.g = serde_json::json!(["1", "1", "1"]);
        assert!(matches!(load_family(&e), Err(Error::InvalidFamily(_))));
    }
}
