//! The family registry: JSON schema, the built-in entries and parsing.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Which admissibility regime a family falls under.
///
/// * `A1` — `f, g` coprime, ordered by naive height, `υ = 1`;
/// * `A2` — `f, g` coprime, quadratic twists included, `υ = 2`;
/// * `A3` — `gcd(f³, g²) = k^r` non-trivial, ordered by naive height;
/// * `A4` — ordered by the unnormalized height `H₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdmissibilityClass {
    A1,
    A2,
    A3,
    A4,
}

impl AdmissibilityClass {
    /// The height normalization `δ` that goes with the class.
    pub fn delta(self) -> u32 {
        match self {
            AdmissibilityClass::A4 => 0,
            _ => 1,
        }
    }
}

/// One registry entry, exactly as stored in JSON.
///
/// Polynomials are arrays of decimal strings, lowest degree first; the
/// kernel is `{type, data}` as understood by
/// [`KernelSpec::from_json`](crate::isogeny::KernelSpec::from_json).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub name: String,
    #[serde(default)]
    pub label: String,
    pub ell: u64,
    pub upsilon: u32,
    pub tau: u32,
    pub m: u32,
    pub delta: u32,
    pub class: AdmissibilityClass,
    pub f: Value,
    pub g: Value,
    pub kernel: Value,
}

#[derive(Serialize, Deserialize)]
struct RegistryDoc {
    families: Vec<RegistryEntry>,
}

const BUILTIN: &str = include_str!("../../data/families.json");

/// Parses a registry document `{"families": [...]}`.
pub fn parse_registry(text: &str) -> Result<Vec<RegistryEntry>> {
    let doc: RegistryDoc = serde_json::from_str(text)?;
    let mut seen = std::collections::BTreeSet::new();
    for e in &doc.families {
        if !seen.insert(e.name.clone()) {
            return Err(Error::Parse(format!("duplicate family name {:?}", e.name)));
        }
    }
    Ok(doc.families)
}

/// Serializes entries back to a registry document.
pub fn registry_to_json(entries: &[RegistryEntry]) -> Value {
    serde_json::to_value(RegistryDoc {
        families: entries.to_vec(),
    })
    .expect("registry serializes")
}

/// The registry shipped with the crate.
pub fn builtin_registry() -> Vec<RegistryEntry> {
    parse_registry(BUILTIN).expect("built-in registry is well formed")
}

/// Looks up an entry by name.
pub fn find_entry<'a>(entries: &'a [RegistryEntry], name: &str) -> Result<&'a RegistryEntry> {
    entries.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
        Error::InvalidFamily(format!("unknown family {name:?}; known: {}", names.join(", ")))
    })
}
