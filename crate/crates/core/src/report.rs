//! JSON verification reports.
//!
//! Everything that depends on the wall clock lives in the `timestamp`
//! block, so two runs of the same configuration differ only there.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One measured check against a named invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// The property this check witnesses.
    pub invariant: String,
    pub values: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: &str, invariant: &str, tolerance: f64) -> Self {
        Self { name: name.into(), invariant: invariant.into(), values: BTreeMap::new(), tolerance, pass: false }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn verdict(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub elapsed_seconds: BTreeMap<String, f64>,
}

impl Timestamp {
    pub fn now() -> Self {
        let unix_seconds = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { unix_seconds, elapsed_seconds: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<CheckResult>,
    /// Tables and sub-reports produced along the way.
    pub data: BTreeMap<String, Value>,
    pub pass: bool,
    pub timestamp: Timestamp,
}

impl VerificationReport {
    pub fn new(command: &str) -> Self {
        Self {
            version: VERSION.into(),
            command: command.into(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            data: BTreeMap::new(),
            pass: true,
            timestamp: Timestamp::now(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) {
        self.parameters.insert(key.into(), to_value(v));
    }

    pub fn datum(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.into(), to_value(v));
    }

    pub fn check(&mut self, c: CheckResult) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    /// Runs `f`, recording its runtime under `label`.
    pub fn timed<R>(&mut self, label: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        self.timestamp.elapsed_seconds.insert(label.into(), start.elapsed().as_secs_f64());
        r
    }

    pub fn elapsed(&self, label: &str) -> Option<f64> {
        self.timestamp.elapsed_seconds.get(label).copied()
    }

    /// Absorbs another report's checks, data and timings under a prefix.
    pub fn merge(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.check(c);
        }
        for (k, v) in other.data {
            self.data.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.parameters {
            self.parameters.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.timestamp.elapsed_seconds {
            self.timestamp.elapsed_seconds.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The report without its timestamp block, for determinism checks.
    pub fn without_timestamp(&self) -> Self {
        Self { timestamp: Timestamp::default(), ..self.clone() }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
            s += &format!("{} {} [{}] {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.invariant, vals.join(" "));
        }
        s
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_verdict_and_determinism() {
        let mut r = VerificationReport::new("verify demo");
        r.param("nt", 8);
        r.timed("a", || ());
        r.check(CheckResult::new("ok", "demo", 1e-3).value("err", 1e-4).verdict(true));
        assert!(r.pass);
        r.check(CheckResult::new("bad", "demo", 1e-3).value("err", 1.0).verdict(false));
        assert!(!r.pass);
        assert!(r.summary().contains("FAIL bad [demo] err=1.000000e0"));
        let mut again = VerificationReport::new("verify demo");
        again.param("nt", 8);
        again.check(r.checks[0].clone());
        again.check(r.checks[1].clone());
        assert_eq!(r.without_timestamp().to_json().unwrap(), again.without_timestamp().to_json().unwrap());
        let back: VerificationReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn merge_prefixes_names() {
        let mut a = VerificationReport::new("verify all");
        let mut b = VerificationReport::new("verify x");
        b.check(CheckResult::new("c", "i", 0.0).verdict(false));
        b.datum("t", vec![1, 2]);
        a.merge("x", b);
        assert_eq!(a.checks[0].name, "x.c");
        assert!(!a.pass);
        assert!(a.data.contains_key("x.t"));
    }
}
