//! Command-line front end: config loading, run manifests and the files
//! each command writes.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod macro_file;
pub mod manifest;
pub mod output;
pub mod svg;
pub mod table;

pub use error::{CliError, CliResult};
