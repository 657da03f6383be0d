//! Batch front end for the composite-minimization solvers: builds problems
//! from specs, runs the solver variants, and emits CSV traces, JSON
//! summaries, variant comparisons, and rate reports.

pub mod commands;
pub mod config_file;
pub mod output;

pub use commands::{cmd_compare, cmd_rates, cmd_run, status_code, QStarSource, RunPlan};
pub use config_file::{
    parse_kind, parse_step_init, parse_variant, CliError, OverrideSet, RunConfigFile,
};
pub use output::{compare_table_csv, summary_json, trace_to_csv};
