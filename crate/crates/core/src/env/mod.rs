//! Environments behind one episodic interface.

pub mod maze;
pub mod risk;
mod tabular;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use maze::{MazeEnv, MazeSpec, RewardSetting, Sparsity};
use risk::{RiskCorridor, RiskCorridorSpec};
pub use tabular::TabularEnv;

/// Outcome of one primitive step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub next_state: usize,
    pub reward: f64,
    /// Reached a terminal (goal) state.
    pub terminated: bool,
    /// Hit the step limit without terminating.
    pub truncated: bool,
}

/// An episodic environment with a finite, tabular state encoding.
///
/// A live environment is single-owner: [`Environment::reset`] starts a new
/// episode from a seed and every step mutates it.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn action_names(&self) -> Vec<String>;
    /// Size of the tabular state encoding.
    fn num_states(&self) -> usize;
    fn step_limit(&self) -> usize;
    /// Starts a new episode and returns its start state.
    fn reset(&mut self, seed: u64) -> usize;
    fn state(&self) -> usize;
    /// The current episode terminated or was truncated.
    fn is_done(&self) -> bool;
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }
    fn action_names(&self) -> Vec<String> {
        (**self).action_names()
    }
    fn num_states(&self) -> usize {
        (**self).num_states()
    }
    fn step_limit(&self) -> usize {
        (**self).step_limit()
    }
    fn reset(&mut self, seed: u64) -> usize {
        (**self).reset(seed)
    }
    fn state(&self) -> usize {
        (**self).state()
    }
    fn is_done(&self) -> bool {
        (**self).is_done()
    }
    fn step(&mut self, action: usize) -> Result<StepResult> {
        (**self).step(action)
    }
}

pub const DENSE_SPARSE_MAP: &str = include_str!("../../maps/dense_sparse.map");
pub const SUPER_SPARSE_MAP: &str = include_str!("../../maps/super_sparse.map");
pub const CORRIDOR3_MAP: &str = include_str!("../../maps/corridor3.map");
pub const CORRIDOR4_MAP: &str = include_str!("../../maps/corridor4.map");

/// Bundled map files by name.
pub const BUNDLED_MAPS: [(&str, &str); 4] = [
    ("dense_sparse.map", DENSE_SPARSE_MAP),
    ("super_sparse.map", SUPER_SPARSE_MAP),
    ("corridor3.map", CORRIDOR3_MAP),
    ("corridor4.map", CORRIDOR4_MAP),
];

/// The two maze layouts the reward settings bind to.
#[derive(Clone, Debug)]
pub struct MapSet {
    /// Shared by the dense, sparse and very sparse settings.
    pub dense_sparse: Arc<MazeSpec>,
    /// Extended layout for the super sparse setting.
    pub super_sparse: Arc<MazeSpec>,
    /// `(file name, contents)` of the maps actually loaded.
    pub sources: Vec<(String, String)>,
}

impl MapSet {
    pub fn bundled() -> Self {
        Self::from_sources(DENSE_SPARSE_MAP.to_string(), SUPER_SPARSE_MAP.to_string()).expect("bundled maps are valid")
    }

    /// Loads `dense_sparse.map` and `super_sparse.map` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name))
                .map_err(|e| Error::Config(format!("cannot read map {}: {e}", dir.join(name).display())))
        };
        Self::from_sources(read("dense_sparse.map")?, read("super_sparse.map")?)
    }

    fn from_sources(dense_sparse: String, super_sparse: String) -> Result<Self> {
        let ds = maze::load_map(&dense_sparse)?;
        let ss = maze::load_map(&super_sparse)?;
        if ds.extended || !ss.extended {
            return Err(Error::Config(
                "dense_sparse.map must not be @extended and super_sparse.map must be".into(),
            ));
        }
        Ok(Self {
            dense_sparse: Arc::new(ds),
            super_sparse: Arc::new(ss),
            sources: vec![
                ("dense_sparse.map".into(), dense_sparse),
                ("super_sparse.map".into(), super_sparse),
            ],
        })
    }

    pub fn for_sparsity(&self, sparsity: Sparsity) -> Arc<MazeSpec> {
        if sparsity.needs_extended_map() {
            self.super_sparse.clone()
        } else {
            self.dense_sparse.clone()
        }
    }
}

/// Names an environment in configs, reports and file names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvTag {
    Dense,
    Sparse,
    VerySparse,
    SuperSparse,
    RiskCorridor,
}

impl EnvTag {
    pub fn sparsity(self) -> Option<Sparsity> {
        match self {
            EnvTag::Dense => Some(Sparsity::Dense),
            EnvTag::Sparse => Some(Sparsity::Sparse),
            EnvTag::VerySparse => Some(Sparsity::VerySparse),
            EnvTag::SuperSparse => Some(Sparsity::SuperSparse),
            EnvTag::RiskCorridor => None,
        }
    }

    pub fn from_sparsity(s: Sparsity) -> Self {
        match s {
            Sparsity::Dense => EnvTag::Dense,
            Sparsity::Sparse => EnvTag::Sparse,
            Sparsity::VerySparse => EnvTag::VerySparse,
            Sparsity::SuperSparse => EnvTag::SuperSparse,
        }
    }

    pub fn is_maze(self) -> bool {
        self.sparsity().is_some()
    }

    pub fn label(self) -> &'static str {
        match self {
            EnvTag::RiskCorridor => "risk_corridor",
            other => other.sparsity().map(Sparsity::label).unwrap_or_default(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let all = [
            EnvTag::Dense,
            EnvTag::Sparse,
            EnvTag::VerySparse,
            EnvTag::SuperSparse,
            EnvTag::RiskCorridor,
        ];
        all.into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown environment `{s}`")))
    }
}

/// Everything needed to instantiate any [`EnvTag`].
#[derive(Clone, Debug)]
pub struct EnvContext {
    pub maps: MapSet,
    pub living_penalty: f64,
    pub goal_reward: f64,
    pub risk: RiskCorridorSpec,
}

impl Default for EnvContext {
    fn default() -> Self {
        Self {
            maps: MapSet::bundled(),
            living_penalty: maze::DEFAULT_LIVING_PENALTY,
            goal_reward: maze::DEFAULT_GOAL_REWARD,
            risk: RiskCorridorSpec::default(),
        }
    }
}

impl EnvContext {
    pub fn build(&self, tag: EnvTag) -> Result<AnyEnv> {
        match tag.sparsity() {
            Some(sparsity) => {
                let setting = RewardSetting {
                    sparsity,
                    living_penalty: self.living_penalty,
                    goal_reward: self.goal_reward,
                };
                Ok(AnyEnv::Maze(MazeEnv::new(self.maps.for_sparsity(sparsity), setting)?))
            }
            None => Ok(AnyEnv::Risk(RiskCorridor::new(self.risk.clone())?)),
        }
    }
}

/// Closed set of environment types, so experiment code stays monomorphic.
// Variants are stepped millions of times; boxing the larger one would add an
// indirection per step.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum AnyEnv {
    Maze(MazeEnv),
    Risk(RiskCorridor),
    Tabular(TabularEnv),
}

macro_rules! delegate {
    ($self:ident, $e:ident => $body:expr) => {
        match $self {
            AnyEnv::Maze($e) => $body,
            AnyEnv::Risk($e) => $body,
            AnyEnv::Tabular($e) => $body,
        }
    };
}

impl Environment for AnyEnv {
    fn num_actions(&self) -> usize {
        delegate!(self, e => e.num_actions())
    }
    fn action_names(&self) -> Vec<String> {
        delegate!(self, e => e.action_names())
    }
    fn num_states(&self) -> usize {
        delegate!(self, e => e.num_states())
    }
    fn step_limit(&self) -> usize {
        delegate!(self, e => e.step_limit())
    }
    fn reset(&mut self, seed: u64) -> usize {
        delegate!(self, e => e.reset(seed))
    }
    fn state(&self) -> usize {
        delegate!(self, e => e.state())
    }
    fn is_done(&self) -> bool {
        delegate!(self, e => e.is_done())
    }
    fn step(&mut self, action: usize) -> Result<StepResult> {
        delegate!(self, e => e.step(action))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_maps_load() {
        for (name, text) in BUNDLED_MAPS {
            maze::load_map(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        let maps = MapSet::bundled();
        assert!(maps.super_sparse.extended);
        assert!(maps.dense_sparse.fixed_spawns().len() >= 2);
    }

    #[test]
    fn every_tag_builds() {
        let ctx = EnvContext::default();
        for tag in ["dense", "sparse", "very_sparse", "super_sparse", "risk_corridor"] {
            let t = EnvTag::parse(tag).unwrap();
            assert_eq!(t.label(), tag);
            let env = ctx.build(t).unwrap();
            assert_eq!(env.num_actions(), 3);
        }
        assert!(EnvTag::parse("pong").is_err());
    }
}
