//! Command-line front end for `heaps-core`: model files, subcommands and
//! deterministic CSV output.

mod commands;
pub mod model;
pub mod output;

pub use commands::{run, Cli, CliError, Command, Output, PROTOCOL_CYLINDERS, REPORT_HEADER};
