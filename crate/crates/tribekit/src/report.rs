//! Structured pass/fail records.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(default)]
    pub witness: Option<Value>,
    #[serde(default)]
    pub elapsed_ms: u64,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Pass, witness: None, elapsed_ms: 0 }
    }

    pub fn fail(name: impl Into<String>, witness: Value) -> Self {
        Check { name: name.into(), status: Status::Fail, witness: Some(witness), elapsed_ms: 0 }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Skipped,
            witness: Some(Value::String(reason.into())),
            elapsed_ms: 0,
        }
    }

    /// Pass when `witness` is `None`, fail with it otherwise.
    pub fn from_witness(name: impl Into<String>, witness: Option<Value>) -> Self {
        match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Runs `f`, records its outcome under `name` together with the elapsed time.
    pub fn timed(&mut self, name: &str, f: impl FnOnce() -> Option<Value>) {
        let start = Instant::now();
        let witness = f();
        let mut check = Check::from_witness(name, witness);
        check.elapsed_ms = start.elapsed().as_millis() as u64;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Appends the checks of `other` with `prefix/` prepended to each name.
    pub fn extend_prefixed(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// Copy with every `elapsed_ms` zeroed, for byte-level comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.elapsed_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn status_serializes_lowercase() {
        let mut r = VerificationReport::new();
        r.push(Check::pass("a"));
        r.push(Check::fail("b", json!({"pair": ["g", "f"]})));
        let text = r.to_json();
        assert!(text.contains("\"pass\""));
        assert!(text.contains("\"fail\""));
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(!r.all_pass());
    }

    #[test]
    fn timings_can_be_stripped() {
        let mut r = VerificationReport::new();
        r.timed("slow", || {
            std::thread::sleep(std::time::Duration::from_millis(2));
            None
        });
        assert!(r.checks[0].elapsed_ms >= 1);
        assert_eq!(r.without_timings().checks[0].elapsed_ms, 0);
    }
}
