//! File formats, experiment runner and command-line front end for `crane-core`.

pub mod config;
pub mod dataset;
pub mod interchange;
pub mod runner;
pub mod summary;

pub use config::{load_config, parse_config, ExperimentPlan, SweepAxis};
pub use runner::{run_plan, write_trace, ResultRow, RunOptions, RunOutcome};
pub use summary::{summarize, write_summary, SummaryRow};
