//! Error type shared by every module of the crate.

use thiserror::Error;

/// Every failure the library can report.
///
/// Variants carry a human-readable description of the offending input so
/// that the CLI can surface them without further context.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A prime at which the requested local computation is not supported.
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),
    /// A local computation was asked for the wrong reduction type.
    #[error("wrong reduction type: {0}")]
    WrongReduction(String),
    /// A kernel specification does not describe a subgroup of the curve.
    #[error("kernel validation failed: {0}")]
    KernelValidation(String),
    /// Verification could not be carried out on any sample.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    /// A registry entry violates the admissibility conditions.
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    /// A discriminant factor fits none of the allowed multiplicity patterns.
    #[error("classification error: {0}")]
    Classification(String),
    /// An empirical decision was too close to call.
    #[error("low confidence: {0}")]
    LowConfidence(String),
    /// The hypotheses of a counting statement are not met for the input.
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    /// A computation exceeded its resource guard.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Not enough data to compute a statistic.
    #[error("sample error: {0}")]
    Sample(String),
    /// Malformed textual input (registry JSON, numbers, polynomials).
    #[error("parse error: {0}")]
    Parse(String),
    /// Filesystem or stream failure.
    #[error("i/o error: {0}")]
    Io(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
