use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::precision::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 certified, 1 refuted, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Combined verdict of several checks: any inconclusive wins, then any
    /// refuted, else certified.
    pub fn combine(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Certified;
        for v in vs {
            out = match (out, v) {
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
                (Verdict::Refuted, _) | (_, Verdict::Refuted) => Verdict::Refuted,
                _ => Verdict::Certified,
            };
        }
        out
    }

    /// Exit code for a batch: 2 if anything is inconclusive, else 1 if
    /// anything is refuted, else 0.
    pub fn batch_exit_code(vs: impl IntoIterator<Item = Verdict>) -> i32 {
        Verdict::combine(vs).exit_code()
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "algebraic-supH")]
    AlgebraicSupH,
    GridResidual,
    Both,
    /// Endpoint limits plus a refined grid scan of the stability gap.
    LimitAndScan,
}

/// Outcome of one certified inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `subsolution` or `stability`.
    pub inequality: String,
    pub verdict: Verdict,
    /// Signed margin; negative means the inequality fails at the witness.
    pub worst_margin: f64,
    /// Location of the worst margin.
    pub worst_location: f64,
    /// Variable of `worst_location` (`x` or `r`).
    pub location_variable: String,
    /// Margin uncertainty from enclosure width and precision comparison.
    pub margin_error: f64,
    pub method: Method,
    pub precision: Precision,
    pub n: u32,
    pub p: f64,
    pub m: f64,
    pub multiplier: f64,
    /// Named supporting numbers (all at `precision`).
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Pretty JSON with lexicographically ordered keys; parsing and re-emitting
/// the output reproduces it byte for byte.
pub fn to_canonical_json<T: Serialize>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v)?;
    Ok(serde_json::to_string_pretty(&value)?)
}

/// Re-emits a JSON document in canonical form.
pub fn canonicalize(text: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    Ok(serde_json::to_string_pretty(&value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_precedence() {
        use Verdict::*;
        assert_eq!(Verdict::combine([Certified, Certified]), Certified);
        assert_eq!(Verdict::combine([Certified, Refuted]), Refuted);
        assert_eq!(Verdict::combine([Refuted, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::combine([]), Certified);
        assert_eq!(Verdict::batch_exit_code([Certified, Refuted]), 1);
    }

    #[test]
    fn canonical_round_trip() {
        let mut details = BTreeMap::new();
        details.insert("zeta".to_string(), 0.1 + 0.2);
        details.insert("alpha".to_string(), 1e-300);
        let r = CertificateReport {
            inequality: "subsolution".into(),
            verdict: Verdict::Refuted,
            worst_margin: -0.123456789012345,
            worst_location: 0.0920,
            location_variable: "x".into(),
            margin_error: 1e-12,
            method: Method::AlgebraicSupH,
            precision: Precision::Double,
            n: 13,
            p: 30.0,
            m: 3.5,
            multiplier: 2.03,
            details,
            notes: vec![],
        };
        let s = to_canonical_json(&r).unwrap();
        assert_eq!(canonicalize(&s).unwrap(), s);
        assert!(s.find("\"details\"").unwrap() < s.find("\"inequality\"").unwrap());
        assert!(s.contains("\"algebraic-supH\""));
        let back: CertificateReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
