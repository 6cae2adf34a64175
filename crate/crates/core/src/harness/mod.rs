//! Scenario suites: configuration, batch execution and reporting.

pub mod config;
pub mod metrics;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, LoadedScenario, LoadedSuite, ScenarioConfig, StartPose, SuiteConfig, Variant};
pub use metrics::{metrics_from_csv, TraceMetrics};
pub use runner::{
    run_suite, trace_file_name, trace_to_csv, write_trace_csv, Aggregate, HarnessError, RunOptions, RunRecord,
    ScenarioRecord, SuiteOutcome, SuiteReport,
};
pub use svg::render_run_svg;
