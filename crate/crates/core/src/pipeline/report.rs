//! Verification reports and the anchor registry.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Every anchor a check record may carry, with a one-line description.
pub const ANCHORS: &[(&str, &str)] = &[
    ("unit-euler-factor", "invertibility of Euler-type factors in finite group rings"),
    ("haran-norm-relations", "norm relations of ray-class families up the tower"),
    ("refined-norm-compat", "norm compatibility of S-refined families"),
    ("refinement-multiplier", "multipliers C and B relating a family to its refinement"),
    ("stabilized-ideal-equality", "principal ideals of projected and refined-projected elements agree"),
    ("fitting-quotient", "Fitting ideals commute with quotient base change"),
    ("fitting-invariance", "Fitting ideals are presentation independent and multiplicative"),
    ("main-chain", "finite-level Fitting ideal equals the projected element's ideal"),
    ("scalar-comparison", "two p-adic L-functions differ by a scalar"),
    ("conjecture-check", "membership and generation of theta in a Fitting ideal"),
];

pub fn is_known_anchor(a: &str) -> bool {
    ANCHORS.iter().any(|(k, _)| *k == a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Computed and reported without an assertion.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub params: Map<String, Value>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub witness: Value,
    /// Wall-clock milliseconds; kept out of the JSON so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub runtime_ms: Option<u128>,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, anchor: &str, status: Status) -> Self {
        assert!(is_known_anchor(anchor), "unregistered anchor {anchor:?}");
        CheckRecord {
            id: id.into(),
            anchor: anchor.to_string(),
            params: Map::new(),
            status,
            witness: Value::Null,
            runtime_ms: None,
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(v).expect("params serialize"));
        self
    }

    pub fn witness(mut self, v: impl Serialize) -> Self {
        self.witness = serde_json::to_value(v).expect("witness serializes");
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub info: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    pub fn summary(&self) -> Summary {
        let count = |s| self.records.iter().filter(|r| r.status == s).count();
        Summary {
            total: self.records.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            info: count(Status::Info),
        }
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            summary: Summary,
            records: &'a [CheckRecord],
        }
        let mut s = serde_json::to_string_pretty(&Out {
            summary: self.summary(),
            records: &self.records,
        })
        .expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            };
            let params = serde_json::to_string(&r.params).expect("params serialize");
            let _ = write!(s, "[{tag}] {} ({}) {params}", r.id, r.anchor);
            if r.status != Status::Pass && !r.witness.is_null() {
                let _ = write!(s, " witness={}", r.witness);
            }
            s.push('\n');
        }
        let m = self.summary();
        let _ = writeln!(
            s,
            "{} checks: {} passed, {} failed, {} info",
            m.total, m.passed, m.failed, m.info
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renderings_agree() {
        let mut r = VerificationReport::new();
        r.push(CheckRecord::new("a", "main-chain", Status::Pass).param("n", 1));
        r.push(CheckRecord::new("b", "main-chain", Status::Fail).witness("x"));
        r.push(CheckRecord::new("c", "main-chain", Status::Info));
        assert!(!r.passed());
        let text = r.to_text();
        assert!(text.contains("[PASS] a (main-chain) {\"n\":1}"));
        assert!(text.contains("[FAIL] b"));
        assert!(text.contains("3 checks: 1 passed, 1 failed, 1 info"));
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["summary"]["failed"], 1);
        assert_eq!(json["records"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn empty_report_passes() {
        assert!(VerificationReport::new().passed());
    }

    #[test]
    #[should_panic(expected = "unregistered anchor")]
    fn anchors_are_registered() {
        CheckRecord::new("x", "made-up", Status::Pass);
    }
}
