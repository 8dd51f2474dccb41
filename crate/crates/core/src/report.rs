//! Check reports with a stable, deterministic JSON body.
//!
//! A report is a list of named checks, each carrying the computed and the
//! expected value as strings (exact integers rendered in decimal).  The
//! body — everything except wall-clock timings — is byte-identical across
//! runs on identical inputs, so reports can be diffed in CI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

/// Where the expected value comes from: a `tabulated` constant, a frozen
/// independent `oracle`, or an internal `consistency` condition between
/// two computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedSource {
    Tabulated,
    Oracle,
    Consistency,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub computed: String,
    pub expected: String,
    pub source: ExpectedSource,
    /// Wall-clock duration; excluded from the deterministic body.
    #[serde(skip)]
    pub millis: u128,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub input_digest: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(input_digest: impl Into<String>) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: input_digest.into(),
            checks: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Deterministic report body: timings are skipped by the serializer.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Body plus a `timing` section (total and per-check milliseconds).
    pub fn full_json(&self) -> String {
        let mut v: serde_json::Value =
            serde_json::from_str(&self.body_json()).expect("own body re-parses");
        let per_check: serde_json::Map<String, serde_json::Value> = self
            .checks
            .iter()
            .map(|c| (c.name.clone(), serde_json::Value::from(c.millis as u64)))
            .collect();
        let total: u128 = self.checks.iter().map(|c| c.millis).sum();
        v.as_object_mut().expect("body is an object").insert(
            "timing".to_string(),
            serde_json::json!({ "total_ms": total as u64, "checks_ms": per_check }),
        );
        serde_json::to_string_pretty(&v).expect("report serialization cannot fail")
    }
}

/// Hex-encoded SHA-256, prefixed with the algorithm name.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(7 + 64);
    s.push_str("sha256:");
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(millis: u128) -> Report {
        let mut r = Report::new(sha256_hex(b"input"));
        r.checks.push(Check {
            name: "a.first".into(),
            status: CheckStatus::Pass,
            computed: "42".into(),
            expected: "42".into(),
            source: ExpectedSource::Tabulated,
            millis,
        });
        r
    }

    #[test]
    fn body_is_independent_of_timings() {
        assert_eq!(sample(3).body_json(), sample(9000).body_json());
    }

    #[test]
    fn full_json_reparses_under_the_schema() {
        let full = sample(5).full_json();
        let back: Report = serde_json::from_str(&full).unwrap();
        assert_eq!(back.checks.len(), 1);
        assert!(back.all_passed());
        let v: serde_json::Value = serde_json::from_str(&full).unwrap();
        assert_eq!(v["timing"]["checks_ms"]["a.first"], 5);
    }

    #[test]
    fn failure_is_detected() {
        let mut r = sample(0);
        r.checks.push(Check {
            name: "a.second".into(),
            status: CheckStatus::Fail,
            computed: "0".into(),
            expected: "1".into(),
            source: ExpectedSource::Consistency,
            millis: 0,
        });
        assert!(!r.all_passed());
    }

    #[test]
    fn digest_is_stable_and_prefixed() {
        let d = sha256_hex(b"");
        assert!(d.starts_with("sha256:"));
        assert_eq!(
            d,
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
