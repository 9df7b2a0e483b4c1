//! Plain-text summary of a report.

use std::fmt::Write;

use crate::report::{Report, Verdict};

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

pub fn explain(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "lckit report (schema {}, seed {}, conventions {})",
        report.schema_version,
        report.seed,
        &report.conventions_fingerprint[..12.min(report.conventions_fingerprint.len())]
    );
    if report.suites.is_empty() {
        let _ = writeln!(out, "no suites run");
        return out;
    }
    for e in &report.suites {
        let verdict = match e.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        };
        let _ = writeln!(
            out,
            "{verdict:<5} {:<20} residual_max {:>10}  [{}]",
            e.suite,
            fmt_residual(e.residual_max),
            e.paper_anchor
        );
        if let Some(err) = &e.error {
            let _ = writeln!(out, "      error: {err}");
        }
        match e.suite.as_str() {
            "key-formula" => {
                let r = e.details.get("residual").and_then(|v| v.as_f64());
                let _ = writeln!(out, "      Eq. (1) residual: {}", fmt_residual(r));
            }
            "certify" if e.verdict != Verdict::Pass => {
                let legs: Vec<&str> = e
                    .details
                    .get("failing_legs")
                    .and_then(|v| v.as_array())
                    .map(|a| a.iter().filter_map(|x| x.as_str()).collect())
                    .unwrap_or_default();
                if !legs.is_empty() {
                    let _ = writeln!(out, "      failing legs: {}", legs.join(", "));
                }
            }
            "proof-chain" => {
                if let Some(lines) = e.details.get("lines").and_then(|v| v.as_array()) {
                    for l in lines {
                        let name = l.get("identity").and_then(|v| v.as_str()).unwrap_or("?");
                        let r = l.get("residual").and_then(|v| v.as_f64());
                        let _ = writeln!(out, "      {name}: {}", fmt_residual(r));
                    }
                }
            }
            _ => {}
        }
    }
    let failed = report.suites.iter().filter(|e| e.verdict != Verdict::Pass).count();
    let _ = writeln!(
        out,
        "{} of {} suites passed{}",
        report.suites.len() - failed,
        report.suites.len(),
        if failed == 0 { "" } else { "; see failures above" }
    );
    out
}
