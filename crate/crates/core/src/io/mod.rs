//! Arrangement files, subcommands and JSON reports.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{plane_model, run, Command, Mode, Options, PlaneModel};
pub use format::{emit_arrangement, load_arrangement, parse_arrangement, ArrangementFile};
pub use report::{ExitStatus, Hypotheses, Measured, Report, SCHEMA_ID, SCHEMA_JSON};
