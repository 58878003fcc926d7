pub mod experiment;
pub mod generate;
pub mod report;
pub mod solve;

use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// Where a command takes its configuration from.
#[derive(Clone, Debug)]
pub enum Source {
    /// A config file plus command-line flags.
    Fresh,
    /// The resolved config recorded in a previous run's manifest.
    Manifest(PathBuf),
}

impl Source {
    pub fn manifest(&self) -> CliResult<Option<RunManifest>> {
        match self {
            Source::Fresh => Ok(None),
            Source::Manifest(p) => RunManifest::load(p).map(Some),
        }
    }
}

pub(crate) fn require_config(config: Option<&Path>) -> CliResult<&Path> {
    config.ok_or_else(|| CliError::Config("either --config or --manifest is required".into()))
}
