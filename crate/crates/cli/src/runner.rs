use std::time::Instant;

use serde_json::Map;

use crate::config::RunConfig;
use crate::report::{Report, SuiteEntry, Verdict};
use crate::suites::{run_suite, Context, Outcome, Suite};

fn entry(suite: Suite, result: lckit::Result<Outcome>, wall_ms: u64) -> SuiteEntry {
    let (residual_max, verdict, details, error) = match result {
        Ok(o) => {
            let r = o.residual_max.is_finite().then_some(o.residual_max);
            let v = if o.passed && r.is_some() { Verdict::Pass } else { Verdict::Fail };
            (r, v, o.details, None)
        }
        Err(e) => (None, Verdict::Error, Map::new(), Some(e.to_string())),
    };
    SuiteEntry {
        suite: suite.name().to_string(),
        residual_max,
        verdict,
        paper_anchor: suite.anchor().to_string(),
        wall_ms,
        details,
        error,
    }
}

/// Run the selected suites in canonical order. A suite that fails or
/// errors does not stop the ones after it.
pub fn run(config: &RunConfig) -> Report {
    let cx = Context::new(config);
    let entries = config
        .selected_suites()
        .into_iter()
        .map(|suite| {
            let start = Instant::now();
            let result = run_suite(suite, &cx);
            entry(suite, result, start.elapsed().as_millis() as u64)
        })
        .collect();
    Report::new(config.clone(), entries)
}
