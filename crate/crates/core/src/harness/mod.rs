//! Experiment engine: declarative run configs, multi-seed execution,
//! sweeps, method comparison and CSV/JSON output.

pub mod config;
pub mod metrics;
pub mod problem;
pub mod reference;
pub mod runner;

pub use config::{ConfigErrors, ConfigIssue, RunConfig, SweepSpec, load_config, parse_config};
pub use metrics::{Metric, MetricsRow, MetricsTable, RowStatus};
pub use problem::ProblemInstance;
pub use runner::{
    Comparison, RunOutput, RunnerOptions, Stats, Summary, SweepOutput, compare_methods, median,
    run_single, run_sweep,
};
