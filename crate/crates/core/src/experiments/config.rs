use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::maze::{DEFAULT_GOAL_REWARD, DEFAULT_LIVING_PENALTY};
use crate::env::{EnvContext, EnvTag, MapSet};
use crate::error::{Error, Result};
use crate::genetics::GaConfig;
use crate::learners::{LearnerKind, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Same learner and environment in both stages.
    Validation,
    /// Different learner, same environment.
    Reusability,
    /// Same learner, other reward settings.
    Transferability,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Validation => "validation",
            Mode::Reusability => "reusability",
            Mode::Transferability => "transferability",
        }
    }
}

/// Environment parameters shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSpec {
    /// Directory holding `dense_sparse.map` and `super_sparse.map`; the
    /// bundled maps are used when absent.
    pub maps_dir: Option<PathBuf>,
    pub living_penalty: f64,
    pub goal_reward: f64,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        Self {
            maps_dir: None,
            living_penalty: DEFAULT_LIVING_PENALTY,
            goal_reward: DEFAULT_GOAL_REWARD,
        }
    }
}

impl EnvironmentSpec {
    pub fn context(&self) -> Result<EnvContext> {
        let maps = match &self.maps_dir {
            Some(dir) => MapSet::from_dir(dir)?,
            None => MapSet::bundled(),
        };
        Ok(EnvContext {
            maps,
            living_penalty: self.living_penalty,
            goal_reward: self.goal_reward,
            ..EnvContext::default()
        })
    }
}

/// The macro-generation stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSpec {
    pub learner: LearnerKind,
    pub env: EnvTag,
    pub ga: GaConfig,
    /// Learner hyper-parameters for fitness runs; budget and seed come from
    /// `ga`.
    pub train: TrainConfig,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        Self {
            learner: LearnerKind::QLearning,
            env: EnvTag::Dense,
            ga: GaConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// The macro-utilization stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilizationSpec {
    pub learner: LearnerKind,
    pub envs: Vec<EnvTag>,
    /// Hyper-parameters and budget; the seed is taken from `seeds`.
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub eval_episodes: usize,
    pub buckets: usize,
    /// Validation only: add an arm with the best action-repeat macro of the
    /// same length.
    pub repeat_baseline: bool,
    /// Independent fitness runs averaged when ranking repeat macros.
    pub repeat_trials: usize,
}

impl Default for UtilizationSpec {
    fn default() -> Self {
        Self {
            learner: LearnerKind::QLearning,
            envs: vec![EnvTag::Dense],
            train: TrainConfig::default(),
            seeds: vec![0, 1, 2, 3, 4],
            eval_episodes: 100,
            buckets: 100,
            repeat_baseline: false,
            repeat_trials: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Macro as action names; skips the generation stage when set.
    #[serde(default)]
    pub macro_override: Option<Vec<String>>,
    #[serde(default)]
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub generation: GenerationSpec,
    #[serde(default)]
    pub utilization: UtilizationSpec,
}

impl ExperimentConfig {
    /// Checks the mode invariants and every nested config.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let g = &self.generation;
        let u = &self.utilization;
        g.ga.validate()?;
        g.train.validate()?;
        u.train.validate()?;
        if u.seeds.len() < 2 {
            return bad("utilization.seeds needs at least two seeds".into());
        }
        let mut sorted = u.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != u.seeds.len() {
            return bad("utilization.seeds contains duplicates".into());
        }
        if u.envs.is_empty() {
            return bad("utilization.envs is empty".into());
        }
        if u.eval_episodes == 0 {
            return bad("utilization.eval_episodes must be positive".into());
        }
        if u.buckets < 2 {
            return bad("utilization.buckets must be at least 2".into());
        }
        if u.repeat_baseline && u.repeat_trials == 0 {
            return bad("utilization.repeat_trials must be positive".into());
        }
        if u.repeat_baseline && self.mode != Mode::Validation {
            return bad("repeat_baseline is only available in validation mode".into());
        }
        let same_env = u.envs == [g.env];
        match self.mode {
            Mode::Validation => {
                if u.learner != g.learner || !same_env {
                    return bad(format!(
                        "validation requires the utilization learner and environment to equal the \
                         generation ones ({} on {})",
                        g.learner.label(),
                        g.env.label()
                    ));
                }
            }
            Mode::Reusability => {
                if u.learner == g.learner {
                    return bad(format!(
                        "reusability requires a different utilization learner than `{}`",
                        g.learner.label()
                    ));
                }
                if !same_env {
                    return bad("reusability requires the generation environment in utilization.envs".into());
                }
            }
            Mode::Transferability => {
                if u.learner != g.learner {
                    return bad("transferability requires the same learner in both stages".into());
                }
                if same_env {
                    return bad("transferability requires at least one utilization environment \
                                other than the generation environment"
                        .into());
                }
                if let Some(t) = u.envs.iter().chain([&g.env]).find(|t| !t.is_maze()) {
                    return bad(format!(
                        "transferability only covers maze settings, got `{}`",
                        t.label()
                    ));
                }
            }
        }
        Ok(())
    }
}
