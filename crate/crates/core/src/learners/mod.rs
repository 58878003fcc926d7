//! Tabular learners over macro-augmented action sets.
//!
//! Both learners treat a macro as one decision: they see the start state,
//! the summed reward and the end state, and apply the discount once.
//! Budgets and curve timesteps count primitive steps, including the ones
//! spent inside macros.

mod actor_critic;
mod curiosity;
mod curve;
mod eval;
mod q_learning;

use serde::{Deserialize, Serialize};

pub use actor_critic::{train_actor_critic, train_actor_critic_traced, ActorCriticTables};
pub use curiosity::{curiosity_bonus, VisitCounts};
pub use curve::{CurvePoint, LearningCurve};
pub use eval::{evaluate_policy, EvalStats, Policy, UniformPolicy};
pub use q_learning::{train_q_learning, train_q_learning_traced, QTable};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::seeds::{self, Rng};
use crate::smdp::ActionSet;

/// Hyper-parameters shared by both learners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Primitive timesteps; training stops at the first episode boundary at
    /// or after this many.
    pub budget_steps: u64,
    /// Q-learning step size; also the critic step size of actor-critic.
    pub learning_rate: f64,
    pub actor_learning_rate: f64,
    pub discount: f64,
    /// ε decays linearly from `epsilon_start` to `epsilon_end` over the budget.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Softmax temperature of the actor.
    pub temperature: f64,
    /// Scale β of the count-based bonus `β / √(N + 1)`; 0 disables it.
    pub curiosity_scale: f64,
    /// Actor preferences are clamped to `±logit_bound`.
    pub logit_bound: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            budget_steps: 20_000,
            learning_rate: 0.1,
            actor_learning_rate: 0.05,
            discount: 0.99,
            epsilon_start: 0.1,
            epsilon_end: 0.01,
            temperature: 1.0,
            curiosity_scale: 1e-4,
            logit_bound: 50.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("train config: {m}")));
        if self.budget_steps == 0 {
            return bad("budget_steps must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if !(self.actor_learning_rate > 0.0 && self.actor_learning_rate <= 1.0) {
            return bad("actor_learning_rate must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad("discount must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return bad("epsilon must be in [0, 1]");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be positive");
        }
        if !(self.curiosity_scale >= 0.0) {
            return bad("curiosity_scale must be >= 0");
        }
        if !(self.logit_bound > 0.0) {
            return bad("logit_bound must be positive");
        }
        Ok(())
    }

    /// Copy suited to `tag`: the exploration bonus only applies to mazes.
    pub fn for_env(&self, tag: crate::env::EnvTag) -> Self {
        let mut c = self.clone();
        if !tag.is_maze() {
            c.curiosity_scale = 0.0;
        }
        c
    }

    pub fn epsilon_at(&self, steps: u64) -> f64 {
        let frac = (steps as f64 / self.budget_steps as f64).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }

    pub(crate) fn episode_seed(&self, episode: u64) -> u64 {
        seeds::child_seed(seeds::stream_seed(self.seed, "episodes"), episode)
    }

    pub(crate) fn policy_rng(&self) -> Rng {
        seeds::rng(seeds::stream_seed(self.seed, "policy"))
    }
}

/// Which tabular learner to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    QLearning,
    ActorCritic,
}

impl LearnerKind {
    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::QLearning => "q_learning",
            LearnerKind::ActorCritic => "actor_critic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "q_learning" => Ok(LearnerKind::QLearning),
            "actor_critic" => Ok(LearnerKind::ActorCritic),
            other => Err(Error::Config(format!("unknown learner `{other}`"))),
        }
    }

    pub fn train<E: Environment + ?Sized>(
        self,
        env: &mut E,
        action_set: &ActionSet,
        cfg: &TrainConfig,
    ) -> Result<TrainOutput> {
        match self {
            LearnerKind::QLearning => train_q_learning(env, action_set, cfg),
            LearnerKind::ActorCritic => train_actor_critic(env, action_set, cfg),
        }
    }
}

/// A trained agent of either kind.
#[derive(Clone, Debug)]
pub enum TrainedAgent {
    Q(QTable),
    ActorCritic(ActorCriticTables),
}

impl Policy for TrainedAgent {
    fn choose(&self, state: usize, rng: &mut Rng) -> usize {
        match self {
            TrainedAgent::Q(q) => q.choose(state, rng),
            TrainedAgent::ActorCritic(ac) => ac.choose(state, rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub agent: TrainedAgent,
    pub curve: LearningCurve,
    pub total_steps: u64,
    pub total_decisions: u64,
}

/// One learner update, as logged by the `*_traced` trainers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub state: usize,
    pub choice: usize,
    /// Reward the update used: extrinsic sum plus exploration bonus.
    pub reward: f64,
    pub extrinsic: f64,
    pub next_state: usize,
    pub terminated: bool,
    pub steps_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub reset_seed: u64,
    pub decisions: Vec<Decision>,
}

/// Full decision log of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub episodes: Vec<EpisodeTrace>,
}

pub(crate) fn check_action_set<E: Environment + ?Sized>(env: &E, action_set: &ActionSet) -> Result<()> {
    if action_set.num_primitives() != env.num_actions() {
        return Err(Error::Config(format!(
            "action set has {} primitives but the environment has {}",
            action_set.num_primitives(),
            env.num_actions()
        )));
    }
    if let Some(m) = action_set.macro_action() {
        m.validate(env.num_actions())?;
    }
    Ok(())
}

pub(crate) fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_schedule() {
        let cfg = TrainConfig {
            budget_steps: 100,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.epsilon_at(0), 0.1);
        assert!((cfg.epsilon_at(50) - 0.055).abs() < 1e-12);
        assert!((cfg.epsilon_at(1000) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            curiosity_scale: -1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_lowest(&[0.0, 0.0]), 0);
    }
}
