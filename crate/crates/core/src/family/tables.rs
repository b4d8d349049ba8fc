//! Reference values of the family constants for the built-in families and
//! the comparison of computed constants against them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::rational::{fmt_q, parse_q, Q};

use super::constants::FamilyConstants;

/// Which group of constants a row lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowKind {
    /// Odd `ℓ`: `deg Δ, u±, v±, μ, σ², ρ(1)`.
    Odd,
    /// `ℓ = 2`: `deg Δ`, parity-split `u±`, `v±⁽²⁾`, `μ, σ², ρ(1)`.
    Even,
    /// `ℓ = 2` with `ρ(2)` as well.
    EvenWithRho2,
}

impl RowKind {
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            RowKind::Odd => &["deg_disc", "u_plus", "u_minus", "v_plus", "v_minus", "mu", "sigma_sq", "rho_1"],
            RowKind::Even => &[
                "deg_disc", "u_plus1", "u_plus2", "u_minus1", "u_minus2", "v_plus2", "v_minus2", "mu",
                "sigma_sq", "rho_1",
            ],
            RowKind::EvenWithRho2 => &[
                "deg_disc", "u_plus1", "u_plus2", "u_minus1", "u_minus2", "v_plus2", "v_minus2", "mu",
                "sigma_sq", "rho_1", "rho_2",
            ],
        }
    }
}

/// One reference row.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedRow {
    pub family: &'static str,
    pub group: &'static str,
    pub kind: RowKind,
    pub values: Vec<Q>,
}

fn row(family: &'static str, group: &'static str, kind: RowKind, vals: &[&str]) -> ExpectedRow {
    assert_eq!(vals.len(), kind.fields().len());
    ExpectedRow {
        family,
        group,
        kind,
        values: vals.iter().map(|s| parse_q(s).expect("literal")).collect(),
    }
}

/// Reference rows for every built-in family.
pub fn expected_rows() -> Vec<ExpectedRow> {
    use RowKind::*;
    vec![
        row("z3", "odd-torsion", Odd, &["12", "1", "1", "1/2", "1", "-1/2", "3/2", "1/3"]),
        row("z4", "two-torsion", Even, &["12", "1", "1", "0", "1", "1/2", "1", "1/2", "5/2", "1"]),
        row("z5", "odd-torsion", Odd, &["12", "1", "2", "1/2", "2", "-3/2", "5/2", "2/5"]),
        row("z2", "two-torsion", Even, &["6", "1", "0", "1", "0", "0", "0", "0", "2", "1/2"]),
        row(
            "z2xz2-1",
            "full-two-torsion",
            EvenWithRho2,
            &["6", "0", "1", "2", "0", "1", "0", "-1", "3", "0", "3/2"],
        ),
        row(
            "z2xz2-2",
            "full-two-torsion",
            EvenWithRho2,
            &["6", "0", "1", "2", "0", "1/2", "0", "-3/2", "5/2", "-1/2", "0"],
        ),
        row(
            "z2xz2-3",
            "full-two-torsion",
            EvenWithRho2,
            &["6", "0", "1", "2", "0", "1/2", "0", "-3/2", "5/2", "-1/2", "0"],
        ),
        row("cyc4", "cyclic-four", Even, &["6", "2", "0", "0", "1", "0", "1/2", "3/2", "5/2", "7/4"]),
        row("iso7", "large-isogeny", Odd, &["12", "1", "1", "1/2", "1/2", "0", "1", "18/7"]),
        row("iso13", "large-isogeny", Odd, &["24", "1", "1", "1/2", "1", "1/2", "3/2", "66/13"]),
    ]
}

/// Every comparable field of a computed constant set.
pub fn computed_fields(deg_disc: u32, c: &FamilyConstants) -> BTreeMap<&'static str, Q> {
    let n = |x: u32| Q::from_integer(x.into());
    BTreeMap::from([
        ("deg_disc", n(deg_disc)),
        ("u_plus", n(c.u_plus)),
        ("u_minus", n(c.u_minus)),
        ("v_plus", c.v_plus.clone()),
        ("v_minus", c.v_minus.clone()),
        ("u_plus1", n(c.u_plus1)),
        ("u_plus2", n(c.u_plus2)),
        ("u_minus1", n(c.u_minus1)),
        ("u_minus2", n(c.u_minus2)),
        ("v_plus2", c.v_plus2.clone()),
        ("v_minus2", c.v_minus2.clone()),
        ("mu", c.mu.clone()),
        ("sigma_sq", c.sigma_sq.clone()),
        ("rho_1", c.rho(1)),
        ("rho_2", c.rho(2)),
    ])
}

/// A field whose computed value differs from the reference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub family: String,
    pub field: String,
    pub expected: String,
    pub computed: String,
}

/// Compares a computed constant set against a reference row.
pub fn diff_row(expected: &ExpectedRow, deg_disc: u32, c: &FamilyConstants) -> Vec<Mismatch> {
    let got = computed_fields(deg_disc, c);
    expected
        .kind
        .fields()
        .iter()
        .zip(&expected.values)
        .filter(|(f, v)| &got[**f] != *v)
        .map(|(f, v)| Mismatch {
            family: expected.family.to_string(),
            field: f.to_string(),
            expected: fmt_q(v),
            computed: fmt_q(&got[*f]),
        })
        .collect()
}

/// Computes the constants of every family with a reference row and
/// returns the fields that disagree.
pub fn verify_builtin_tables(branch: super::VBranch) -> crate::error::Result<Vec<Mismatch>> {
    let mut out = Vec::new();
    for r in expected_rows() {
        let fam = super::builtin_family(r.family)?;
        let c = fam.constants(branch)?;
        out.extend(diff_row(&r, fam.disc.weighted_degree(), &c));
    }
    Ok(out)
}
