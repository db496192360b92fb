//! Command-line front end: argument parsing, table output and the self-test runner.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod selftest;

pub use error::{CliError, CliResult};
pub use run::{run, RunConfig};
