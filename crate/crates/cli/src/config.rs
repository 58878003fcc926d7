//! TOML config files and command-line overrides.

use std::path::{Path, PathBuf};

use macroforge::experiments::{EnvironmentSpec, ExperimentConfig, GenerationSpec, Mode, UtilizationSpec};
use macroforge::genetics::GaConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::macro_file::MacroFile;

/// Input of `macroforge generate`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub environment: EnvironmentSpec,
    pub generation: GenerationSpec,
}

impl GenerateConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.generation.ga.validate()?;
        self.generation.train.validate()?;
        Ok(())
    }
}

/// On-disk form of an experiment config: [`ExperimentConfig`] plus an
/// optional `macro_file` that fills `macro_override`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    mode: Mode,
    #[serde(default)]
    macro_override: Option<Vec<String>>,
    #[serde(default)]
    macro_file: Option<PathBuf>,
    #[serde(default)]
    environment: EnvironmentSpec,
    #[serde(default)]
    generation: GenerationSpec,
    #[serde(default)]
    utilization: UtilizationSpec,
}

/// GA parameters that may be overridden on the command line.
#[derive(Clone, Debug, Default)]
pub struct GaOverrides {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub q: Option<usize>,
    pub q_plus: Option<usize>,
    pub q_star: Option<usize>,
}

impl GaOverrides {
    pub fn is_empty(&self) -> bool {
        self.seed.is_none() && self.k.is_none() && self.q.is_none() && self.q_plus.is_none() && self.q_star.is_none()
    }

    pub fn apply(&self, ga: &mut GaConfig) {
        if let Some(v) = self.seed {
            ga.master_seed = v;
        }
        if let Some(v) = self.k {
            ga.k = v;
        }
        if let Some(v) = self.q {
            ga.q = v;
        }
        if let Some(v) = self.q_plus {
            ga.q_plus = v;
        }
        if let Some(v) = self.q_star {
            ga.q_star = v;
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses TOML, reporting the file name along with the parser's line and
/// column.
pub fn parse_toml<T: DeserializeOwned>(text: &str, origin: &Path) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Resolves `path` against the directory of the config that named it and
/// makes it absolute, so the resolved config no longer depends on the
/// working directory.
fn resolve(path: &Path, base: &Path) -> CliResult<PathBuf> {
    let joined = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    };
    joined
        .canonicalize()
        .map_err(|e| CliError::Config(format!("cannot resolve {}: {e}", joined.display())))
}

fn resolve_maps(env: &mut EnvironmentSpec, base: &Path) -> CliResult<()> {
    if let Some(dir) = &env.maps_dir {
        env.maps_dir = Some(resolve(dir, base)?);
    }
    Ok(())
}

pub fn load_generate_config(path: &Path, overrides: &GaOverrides) -> CliResult<GenerateConfig> {
    let mut cfg: GenerateConfig = parse_toml(&read_text(path)?, path)?;
    resolve_maps(&mut cfg.environment, &base_dir(path))?;
    overrides.apply(&mut cfg.generation.ga);
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_experiment_config(path: &Path, overrides: &GaOverrides) -> CliResult<ExperimentConfig> {
    let file: ExperimentFile = parse_toml(&read_text(path)?, path)?;
    let base = base_dir(path);
    let macro_override = match (file.macro_override, file.macro_file) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(format!(
                "{}: set either macro_override or macro_file, not both",
                path.display()
            )))
        }
        (Some(m), None) => Some(m),
        (None, Some(f)) => Some(MacroFile::load(&resolve(&f, &base)?)?.macro_action),
        (None, None) => None,
    };
    let mut cfg = ExperimentConfig {
        mode: file.mode,
        macro_override,
        environment: file.environment,
        generation: file.generation,
        utilization: file.utilization,
    };
    resolve_maps(&mut cfg.environment, &base)?;
    overrides.apply(&mut cfg.generation.ga);
    cfg.validate()?;
    Ok(cfg)
}
