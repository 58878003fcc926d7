//! The saved result of a macro search.

use std::path::Path;

use macroforge::env::EnvTag;
use macroforge::genetics::GaConfig;
use macroforge::learners::LearnerKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroFile {
    pub env: EnvTag,
    pub learner: LearnerKind,
    /// Primitive action names in execution order.
    #[serde(rename = "macro")]
    pub macro_action: Vec<String>,
    pub fitness: f64,
    pub ga: GaConfig,
}

impl MacroFile {
    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed macro file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&crate::config::read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trips(
            fitness in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
            names in proptest::collection::vec("[A-Z_]{1,12}", 1..8),
            k in 1usize..500,
            seed in any::<u64>(),
        ) {
            let m = MacroFile {
                env: EnvTag::SuperSparse,
                learner: LearnerKind::ActorCritic,
                macro_action: names,
                fitness,
                ga: GaConfig { k, master_seed: seed, ..GaConfig::default() },
            };
            let back = MacroFile::from_json(&m.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
