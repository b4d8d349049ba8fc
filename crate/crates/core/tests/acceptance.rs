//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Each criterion is evaluated at its stated scale and tolerance and its
//! verdict printed as is.  The assertions at the end of each check pin the
//! observed behaviour, so a regression in any direction (including a failing
//! criterion that silently starts "passing" for the wrong reason) breaks the
//! test.  Run with `--nocapture` to see the report.

use std::time::Instant;

use num_bigint::BigInt;
use tamratio::algebra::qpoly::qpoly;
use tamratio::algebra::rational::{fmt_q, q, qf, Q};
use tamratio::algebra::whom::WHomPoly;
use tamratio::arith::is_prime_u64;
use tamratio::curves::disc_of;
use tamratio::enumerate::{count_congruence, enum_points, parse_height, projective_line};
use tamratio::family::chebotarev::qr_root_average;
use tamratio::family::tables::verify_builtin_tables;
use tamratio::family::{builtin_family, builtin_registry, VBranch};
use tamratio::isogeny::{specialize, verify_isogeny_report, KernelSpec};
use tamratio::statlab::{
    average_power_of, curve_records, family_records, oracle_sweep, summarize_distribution, tail_count_of,
};

fn verdict(n: u32, pass: bool, detail: &str, t: Instant) {
    println!(
        "criterion {n}: {} ({:.1} s) — {detail}",
        if pass { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );
}

fn big(s: &str) -> BigInt {
    parse_height(s).unwrap()
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn acceptance_1_table_reproduction() {
    let t = Instant::now();
    let mism = verify_builtin_tables(VBranch::Theta).unwrap();
    let detail = if mism.is_empty() {
        "all rows reproduced exactly".to_string()
    } else {
        mism.iter()
            .map(|m| format!("{}.{}: reference {} vs derived {}", m.family, m.field, m.expected, m.computed))
            .collect::<Vec<_>>()
            .join("; ")
    };
    verdict(1, mism.is_empty(), &detail, t);
    // The only difference is the large-isogeny ℓ = 13 value of μ, whose
    // reference row contradicts its own c± (checked in tests/tables.rs).
    let got: Vec<(&str, &str)> = mism.iter().map(|m| (m.family.as_str(), m.field.as_str())).collect();
    assert_eq!(got, vec![("iso13", "mu")]);
    assert!(t.elapsed().as_secs() < 60);
}

// ---------------------------------------------------------------- criterion 2

/// `Σ c·aⁱbʲ` as a weighted form of weighted degree `w`.
fn form(tau: u32, w: u32, terms: &[(i64, u32, u32)]) -> WHomPoly {
    let deg = terms.iter().map(|t| t.1).max().unwrap() as usize;
    let mut c = vec![0i64; deg + 1];
    for &(k, i, j) in terms {
        assert_eq!(tau * i + j, w, "inhomogeneous reference factor");
        c[i as usize] += k;
    }
    WHomPoly::new(tau, w, qpoly(&c)).unwrap()
}

/// `c·∏ Pᵉ` for a list of `(P, e)`.
fn display(tau: u32, c: Q, factors: &[(WHomPoly, u32)]) -> WHomPoly {
    factors
        .iter()
        .fold(WHomPoly::constant(tau, c), |acc, (p, e)| acc.mul(&p.pow(*e)))
}

/// A displayed discriminant: its printed constant, its factors, and the
/// printed constant's relation to the derived one.
struct RefDisplay {
    family: &'static str,
    which: &'static str,
    form: WHomPoly,
}

fn pw(base: i64, e: u32) -> Q {
    q(base).pow(e as i32)
}

/// The reference displays with the two known factor typos corrected
/// (`a² + 11ab − a` → `a² + 11ab − b²`; `a² + 13ab + 49ab` → `a² + 13ab + 49b²`).
fn reference_displays() -> Vec<RefDisplay> {
    let a = |tau| form(tau, tau, &[(1, 1, 0)]);
    let b = |tau| form(tau, 1, &[(1, 0, 1)]);
    let mut out = Vec::new();
    let mut push = |family, which, form| out.push(RefDisplay { family, which, form });

    // z3: τ = 3.
    let p5 = form(3, 3, &[(1, 1, 0), (5, 0, 3)]);
    let p9 = form(3, 3, &[(1, 1, 0), (9, 0, 3)]);
    push("z3", "Δ", display(3, q(27), &[(p5.clone(), 1), (p9.clone(), 3)]));
    push("z3", "Δ′", display(3, pw(3, 9), &[(p5, 3), (p9, 1)]));

    // z4: τ = 2.
    let l = form(2, 2, &[(16, 1, 0), (1, 0, 2)]);
    let c = -(pw(2, 8) * pw(3, 12));
    push("z4", "Δ", display(2, c.clone(), &[(a(2), 4), (b(2), 2), (l.clone(), 1)]));
    push("z4", "Δ′", display(2, c, &[(a(2), 2), (b(2), 4), (l, 2)]));

    // z5: τ = 1 (corrected factor).
    let qd = form(1, 2, &[(1, 2, 0), (11, 1, 1), (-1, 0, 2)]);
    let c = pw(2, 8) * pw(3, 12);
    push("z5", "Δ", display(1, c.clone(), &[(qd.clone(), 1), (a(1), 5), (b(1), 5)]));
    push("z5", "Δ′", display(1, c, &[(qd, 5), (a(1), 1), (b(1), 1)]));

    // z2: τ = 2.
    let l1 = form(2, 2, &[(1, 1, 0), (3, 0, 2)]);
    let l4 = form(2, 2, &[(4, 1, 0), (3, 0, 2)]);
    push("z2", "Δ", display(2, q(1), &[(l1.clone(), 2), (l4.clone(), 1)]));
    push("z2", "Δ′", display(2, q(-16), &[(l1, 1), (l4, 2)]));

    // z2xz2, first kernel: τ = 1.
    let amb = form(1, 1, &[(1, 1, 0), (-1, 0, 1)]);
    push("z2xz2-1", "Δ", display(1, q(-1), &[(a(1), 2), (b(1), 2), (amb.clone(), 2)]));
    push("z2xz2-1", "Δ′", display(1, pw(2, 8), &[(a(1), 1), (b(1), 1), (amb, 4)]));

    // cyc4: τ = 1.
    let m = form(1, 1, &[(2, 1, 0), (-3, 0, 1)]);
    let p = form(1, 1, &[(2, 1, 0), (3, 0, 1)]);
    push("cyc4", "Δ", display(1, q(-1), &[(a(1), 4), (m.clone(), 1), (p.clone(), 1)]));
    push("cyc4", "Δ′", display(1, q(64), &[(a(1), 2), (p, 2), (m, 2)]));

    // iso7: τ = 1 (corrected factor).
    let k = form(1, 2, &[(1, 2, 0), (13, 1, 1), (49, 0, 2)]);
    let c = -(pw(2, 8) * pw(3, 6));
    push("iso7", "Δ", display(1, c.clone(), &[(a(1), 1), (b(1), 7), (k.clone(), 2)]));
    push("iso7", "Δ′", display(1, c * pw(7, 6), &[(a(1), 7), (b(1), 1), (k, 2)]));

    // iso13: τ = 1, factors exactly as displayed.
    let k1 = form(1, 2, &[(1, 2, 0), (5, 1, 1), (1, 0, 2)]);
    let k2 = form(1, 2, &[(1, 2, 0), (6, 1, 1), (13, 0, 2)]);
    let c = -(pw(2, 8) * pw(3, 12));
    push("iso13", "Δ", display(1, c.clone(), &[(a(1), 1), (b(1), 13), (k1.clone(), 2), (k2.clone(), 3)]));
    push("iso13", "Δ′", display(1, c * pw(13, 6), &[(a(1), 13), (b(1), 1), (k1, 2), (k2, 3)]));
    out
}

/// Ratio of two forms when one is a constant multiple of the other.
fn constant_ratio(x: &WHomPoly, y: &WHomPoly) -> Option<Q> {
    if x.weighted_degree() != y.weighted_degree() {
        return None;
    }
    let (px, py) = (x.dehomogenize(), y.dehomogenize());
    let r = px.lc()? / py.lc()?;
    (py.scale(&r) == *px).then_some(r)
}

#[test]
fn acceptance_2_discriminant_identities() {
    let t = Instant::now();
    let mut exact = 0;
    let mut deviations: Vec<(String, String, String)> = Vec::new();
    for d in reference_displays() {
        let fam = builtin_family(d.family).unwrap();
        let got = if d.which == "Δ" { &fam.disc } else { &fam.disc_prime };
        if *got == d.form {
            exact += 1;
            continue;
        }
        let kind = match constant_ratio(got, &d.form) {
            Some(r) => format!("constant: derived = {} × displayed", fmt_q(&r)),
            None => "factors differ".to_string(),
        };
        deviations.push((d.family.to_string(), d.which.to_string(), kind));
    }

    // Every derived Δ equals 4A³ + 27B² of the derived A, B at sample points,
    // independently of the factored form.
    for e in builtin_registry() {
        let fam = builtin_family(&e.name).unwrap();
        for (x, y) in [(1i64, 2i64), (3, -1), (-2, 5), (7, 3)] {
            let (bx, by) = (BigInt::from(x), BigInt::from(y));
            let (av, bv) = (fam.a.eval_int(&bx, &by).unwrap(), fam.b.eval_int(&bx, &by).unwrap());
            assert_eq!(fam.disc.eval_int(&bx, &by).unwrap(), disc_of(&av, &bv), "{} at ({x},{y})", e.name);
        }
    }

    // Spot checks behind the two factor corrections.
    let z5 = builtin_family("z5").unwrap();
    let (one, two) = (BigInt::from(1), BigInt::from(2));
    let v = z5.disc.eval_int(&one, &two).unwrap();
    assert_eq!(v, BigInt::from(82_717_728_768u64));
    assert_eq!(v, BigInt::from(2u64.pow(8) * 3u64.pow(12) * 2u64.pow(5) * 19));
    // As printed, (a² + 11ab − a)a⁵b⁵ at (1,2) would give 2⁸·3¹²·22·32.
    assert_ne!(v, BigInt::from(2u64.pow(8) * 3u64.pow(12) * 22 * 32));
    let iso7 = builtin_family("iso7").unwrap();
    let v = iso7.disc.eval_int(&one, &two).unwrap();
    // −2⁸·3⁶·a·b⁷·(a² + 13ab + 49b²)² at (1,2): 223² (corrected) vs 125² (as printed).
    assert_eq!(v, -BigInt::from(2i64.pow(8) * 3i64.pow(6) * 128 * 223 * 223));

    // The remaining differences, each confirmed by a direct evaluation:
    // z2xz2-1 at (1,2) has A = −81, B = 0, so Δ = 4·(−81)³ = −4·3¹²,
    // cyc4 at (1,0) has A = 1, B = 0, so Δ = +4, and the ℓ = 13 display's
    // quadratic factor a² + 5ab + b² is not a factor of 4A³ + 27B².
    let z22 = builtin_family("z2xz2-1").unwrap();
    assert_eq!(z22.disc.eval_int(&one, &two).unwrap(), BigInt::from(-4 * 3i64.pow(12)));
    let cyc4 = builtin_family("cyc4").unwrap();
    assert_eq!(cyc4.disc.eval_int(&one, &BigInt::from(0)).unwrap(), BigInt::from(4));
    let iso13 = builtin_family("iso13").unwrap();
    let k1 = qpoly(&[13, 5, 1]);
    assert!(iso13.disc.dehomogenize().rem(&k1).unwrap().is_zero());
    assert!(!iso13.disc.dehomogenize().rem(&qpoly(&[1, 5, 1])).unwrap().is_zero());

    let detail = format!(
        "{exact}/16 displays equal exactly after the two factor corrections; deviations: {}",
        deviations
            .iter()
            .map(|(f, w, k)| format!("{f} {w} ({k})"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    verdict(2, deviations.is_empty(), &detail, t);
    let got: Vec<(&str, &str)> = deviations.iter().map(|(f, w, _)| (f.as_str(), w.as_str())).collect();
    assert_eq!(
        got,
        vec![
            ("z2xz2-1", "Δ"),
            ("z2xz2-1", "Δ′"),
            ("cyc4", "Δ"),
            ("cyc4", "Δ′"),
            ("iso7", "Δ′"),
            ("iso13", "Δ"),
            ("iso13", "Δ′"),
        ]
    );
    // Apart from the ℓ = 13 quadratic factor, every deviation is a constant.
    for (f, w, k) in &deviations {
        if f == "iso13" {
            assert_eq!(k, "factors differ", "{f} {w}");
        } else {
            assert!(k.starts_with("constant"), "{f} {w}: {k}");
        }
    }
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn acceptance_3_velu_point_counts() {
    let t = Instant::now();
    let candidates = [q(2), q(3), q(-7), qf(7, 2), q(11), qf(-5, 3), q(13), qf(2, 9)];
    let (mut families, mut compared, mut mismatched) = (0, 0, 0);
    for e in builtin_registry() {
        let fam = builtin_family(&e.name).unwrap();
        if matches!(fam.kernel, KernelSpec::ExplicitCodomain(..)) {
            continue;
        }
        families += 1;
        let zero = BigInt::from(0);
        let mut used = 0;
        for s in &candidates {
            if used == 5 {
                break;
            }
            let (a, b) = specialize(&fam.pair.f, &fam.pair.g, s);
            let (a2, b2) = specialize(&fam.pair.f_prime, &fam.pair.g_prime, s);
            let (d1, d2) = (disc_of(&a, &b), disc_of(&a2, &b2));
            if d1 == zero || d2 == zero {
                continue;
            }
            used += 1;
            // The first ten primes p > 3 of good reduction for both curves.
            let good: Vec<u64> = (5u64..)
                .filter(|&p| is_prime_u64(p))
                .filter(|&p| {
                    let pb = BigInt::from(p);
                    &d1 % &pb != zero && &d2 % &pb != zero
                })
                .take(10)
                .collect();
            let rep = verify_isogeny_report(&fam.pair, std::slice::from_ref(s), &good).unwrap();
            assert_eq!(rep.compared, 10, "{} at t = {s}", e.name);
            compared += rep.compared;
            mismatched += rep.mismatches.len();
        }
        assert_eq!(used, 5, "{}: not enough nonsingular samples", e.name);
    }
    let pass = mismatched == 0 && compared == families * 50;
    verdict(
        3,
        pass,
        &format!("{families} families × 5 values of t × 10 good primes: {compared} compared, {mismatched} mismatches"),
        t,
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn acceptance_4_local_ratio_oracle() {
    let t = Instant::now();
    let mut all_pass = true;
    let mut lines = Vec::new();
    for e in builtin_registry() {
        let fam = builtin_family(&e.name).unwrap();
        let tf = Instant::now();
        // Smallest N ∈ {10⁶, 10⁸, 10¹⁰} with at least 10⁴ curves.
        let mut n = big("1e6");
        let en = loop {
            let en = enum_points(&fam, &n, fam.delta).unwrap();
            if en.points.len() >= 10_000 || n >= big("1e10") {
                break en;
            }
            n *= 100;
        };
        let s = oracle_sweep(&fam, &en.points).unwrap();
        let enough = s.curves >= 10_000;
        all_pass &= enough && s.disagreements.is_empty();
        lines.push(format!(
            "{} N={} curves={} compared={} agree={} excluded={} additive={}",
            e.name, n, s.curves, s.compared, s.agreements, s.excluded, s.skipped_additive
        ));
        assert!(s.disagreements.is_empty(), "{}: {:?}", e.name, &s.disagreements[..s.disagreements.len().min(5)]);
        assert_eq!(s.compared, s.agreements);
        assert!(tf.elapsed().as_secs() < 300, "{} took too long", e.name);
        // Only z2 is dense enough for 10⁴ curves below 10¹⁰.
        assert_eq!(enough, e.name == "z2", "{}", e.name);
    }
    verdict(
        4,
        all_pass,
        &format!(
            "100% agreement everywhere; fewer than 10⁴ curves below height 10¹⁰ for all families but z2 [{}]",
            lines.join("; ")
        ),
        t,
    );
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn acceptance_5_projective_equidistribution() {
    let t = Instant::now();
    let fam = builtin_family("z3").unwrap();
    let en = enum_points(&fam, &big("1e12"), 0).unwrap();
    let mut worst = Vec::new();
    let mut pass = true;
    for qm in [5u64, 7] {
        let mut max_rel: f64 = 0.0;
        for class in projective_line(qm) {
            let r = count_congruence(&fam, &en.points, 0, class).unwrap();
            max_rel = max_rel.max(r.relative_error());
        }
        pass &= max_rel <= 0.10;
        worst.push((qm, max_rel));
    }
    verdict(
        5,
        pass,
        &format!(
            "{} points; max relative error q=5: {:.3}, q=7: {:.3}",
            en.points.len(),
            worst[0].1,
            worst[1].1
        ),
        t,
    );
    assert!(t.elapsed().as_secs() < 60);
    assert!(worst[0].1 <= 0.10);
    // With τ = 3 the b-range at 10¹² is only 0..6, so the class [1 : 0]
    // mod 7 is carried by the single row b = 0.
    assert!(worst[1].1 > 0.10);
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn acceptance_6_chebotarev_estimates() {
    let t = Instant::now();
    let z5 = builtin_family("z5").unwrap();
    let th5 = qr_root_average(z5.split.d_plus.dehomogenize(), &z5.g, 1_000_000).unwrap();
    let z3 = builtin_family("z3").unwrap();
    let h = qpoly(&[9, 1]);
    assert!(z3.split.d_minus.dehomogenize().rem(&h).unwrap().is_zero());
    let th3 = qr_root_average(&h, &z3.g, 1_000_000).unwrap();
    let pass = (th5 - 0.5).abs() <= 0.05 && (th3 - 1.0).abs() <= 0.05;
    verdict(6, pass, &format!("z5 D₊: θ̂ = {th5:.5}; z3 a+9b³: θ̂ = {th3:.5}"), t);
    assert!(pass);
    assert!(t.elapsed().as_secs() < 120);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn acceptance_7_per_prime_density_consistency() {
    let t = Instant::now();
    let fam = builtin_family("z5").unwrap();
    let n = big("1e12");
    let (en, recs) = family_records(&fam, &n).unwrap();
    let s = summarize_distribution(&fam, &n, 300, &recs, en.degenerate).unwrap();
    let pass = s.consistent_fraction >= 0.9 && s.tv_distance <= 0.05;
    verdict(
        7,
        pass,
        &format!(
            "{} curves; consistent fraction {:.3} over {} primes; TV = {:.3}",
            s.curve_count,
            s.consistent_fraction,
            s.per_prime.len(),
            s.tv_distance
        ),
        t,
    );
    // Only a handful of curves lie below 10¹², all with small D± values,
    // so the convolution model cannot be matched in total variation.
    assert!(s.curve_count < 50);
    assert!(s.consistent_fraction >= 0.9);
    assert!(s.tv_distance > 0.05);
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn acceptance_8_property_substitutes() {
    let t = Instant::now();

    // (a) the independence/convolution check of criterion 7.
    let z5 = builtin_family("z5").unwrap();
    let n12 = big("1e12");
    let (en, recs) = family_records(&z5, &n12).unwrap();
    let s7 = summarize_distribution(&z5, &n12, 300, &recs, en.degenerate).unwrap();
    let pass_a = s7.consistent_fraction >= 0.9 && s7.tv_distance <= 0.05;

    // (b) monotonicity of the average of ℓ^{s}.
    let avg = |name: &str, ns: &[&str]| -> Vec<f64> {
        let fam = builtin_family(name).unwrap();
        let c = fam.constants(VBranch::Theta).unwrap();
        ns.iter()
            .map(|s| {
                let n = big(s);
                let pts = enum_points(&fam, &n, fam.delta).unwrap().points;
                let recs = curve_records(&fam, &pts).unwrap();
                average_power_of(&c, fam.ell, &n, &recs, 1).unwrap().average_f64
            })
            .collect()
    };
    let ns = ["1e6", "1e8", "1e10"];
    let z4 = avg("z4", &ns);
    let z22 = avg("z2xz2-2", &ns);
    let increasing = z4.windows(2).all(|w| w[1] > w[0]);
    let non_increasing = z22.windows(2).all(|w| w[1] <= w[0]);
    let pass_b = increasing && non_increasing;

    // (c) curves in the upper tail s ≥ log log N.
    let fam = builtin_family("z4").unwrap();
    let (_, recs) = family_records(&fam, &n12).unwrap();
    let c = fam.constants(VBranch::Theta).unwrap();
    let tail = tail_count_of(&c, &n12, &recs, &q(1)).unwrap();
    let max_sum = recs.iter().map(|r| r.exponent_sum).max().unwrap();
    let pass_c = tail.count > 0;

    verdict(
        8,
        pass_a && pass_b && pass_c,
        &format!(
            "(a) {} [TV {:.3}]; (b) {} [z4 {:.4?}, z2xz2-2 {:.4?}]; (c) {} [{} of {} curves with s ≥ {:.3}, max s = {}]",
            if pass_a { "PASS" } else { "FAIL" },
            s7.tv_distance,
            if pass_b { "PASS" } else { "FAIL" },
            z4,
            z22,
            if pass_c { "PASS" } else { "FAIL" },
            tail.count,
            tail.curve_count,
            tail.threshold,
            max_sum
        ),
        t,
    );
    assert!(pass_b);
    assert!(!pass_a);
    // At 10¹² the threshold log log N ≈ 3.32 exceeds every observed sum.
    assert!(!pass_c);
    assert!((max_sum as f64) < tail.threshold);
    assert!(t.elapsed().as_secs() < 300);
}
