//! Command-line front end: flag and config-file parsing, presets, and report-writing commands.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod presets;
pub mod run;

pub use config::{parse_config, Args, Command, RunConfig};
pub use error::CliError;
pub use run::{run, run_and_report, RunSummary};
