//! JSON reports.
//!
//! Layout (schema version 1):
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "tool": "lckit 0.1.0",
//!   "conventions_fingerprint": "<sha256 of the conventions record>",
//!   "seed": 7,
//!   "config": { ... },
//!   "passed": true,
//!   "suites": [
//!     { "suite": "key-formula", "residual_max": 1e-12, "verdict": "pass",
//!       "paper_anchor": "...", "wall_ms": 12, "details": { ... }, "error": null }
//!   ]
//! }
//! ```
//!
//! `wall_ms` is the only field that varies between identical runs;
//! [`Report::body`] drops it.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The suite could not run; counts as a failure.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: String,
    /// `null` in JSON when the suite errored or produced NaN.
    pub residual_max: Option<f64>,
    pub verdict: Verdict,
    pub paper_anchor: String,
    pub wall_ms: u64,
    pub details: Map<String, Value>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub conventions_fingerprint: String,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub suites: Vec<SuiteEntry>,
}

impl Report {
    pub fn new(config: RunConfig, suites: Vec<SuiteEntry>) -> Self {
        let passed = suites.iter().all(|s| s.verdict == Verdict::Pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: format!("lckit {}", env!("CARGO_PKG_VERSION")),
            conventions_fingerprint: lckit::conventions::fingerprint(),
            seed: config.seed,
            config,
            passed,
            suites,
        }
    }

    pub fn entry(&self, suite: &str) -> Option<&SuiteEntry> {
        self.suites.iter().find(|s| s.suite == suite)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report without timings, for reproducibility comparisons.
    pub fn body(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(Value::Array(entries)) = v.get_mut("suites") {
            for e in entries {
                if let Value::Object(m) = e {
                    m.remove("wall_ms");
                }
            }
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}
