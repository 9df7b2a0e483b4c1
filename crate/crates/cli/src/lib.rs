//! Config loading, suite execution, reports and summaries behind the
//! `lckit` binary.

pub mod config;
pub mod explain;
pub mod report;
pub mod runner;
pub mod suites;

pub use config::{ConfigError, RunConfig};
pub use explain::explain;
pub use report::{Report, SuiteEntry, Verdict};
pub use runner::run;
pub use suites::Suite;

/// Overrides the default output directory for reports.
pub const OUT_DIR_ENV: &str = "LCK_LAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "lckit-reports";
