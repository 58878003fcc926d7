use rand::Rng as _;

use super::curiosity::{curiosity_bonus, VisitCounts};
use super::eval::Policy;
use super::{argmax_lowest, Decision, EpisodeTrace, LearningCurve, Trace, TrainConfig, TrainOutput, TrainedAgent};
use crate::env::Environment;
use crate::error::Result;
use crate::seeds::Rng;
use crate::smdp::{execute_choice, macro_backup, ActionSet};

/// Softmax actor preferences and a tabular critic.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorCriticTables {
    n_actions: usize,
    prefs: Vec<f64>,
    values: Vec<f64>,
    temperature: f64,
}

impl ActorCriticTables {
    pub fn new(n_states: usize, n_actions: usize, temperature: f64) -> Self {
        Self {
            n_actions,
            prefs: vec![0.0; n_states * n_actions],
            values: vec![0.0; n_states],
            temperature,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn preferences(&self, s: usize) -> &[f64] {
        &self.prefs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn value(&self, s: usize) -> f64 {
        self.values[s]
    }

    pub fn probabilities(&self, s: usize) -> Vec<f64> {
        let p = self.preferences(s);
        let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = p.iter().map(|x| ((x - max) / self.temperature).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }

    pub fn sample(&self, s: usize, rng: &mut Rng) -> usize {
        let probs = self.probabilities(s);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Applies one TD actor-critic update and returns the TD error.
    #[allow(clippy::too_many_arguments)]
    pub fn update(&mut self, s: usize, a: usize, reward: f64, next: usize, terminated: bool, cfg: &TrainConfig) -> f64 {
        let bootstrap = if terminated { 0.0 } else { self.values[next] };
        let delta = macro_backup(reward, cfg.discount, bootstrap) - self.values[s];
        self.values[s] += cfg.learning_rate * delta;
        let probs = self.probabilities(s);
        let bound = cfg.logit_bound;
        for (j, p) in probs.iter().enumerate() {
            let grad = if j == a { 1.0 - p } else { -p };
            let pref = &mut self.prefs[s * self.n_actions + j];
            *pref = (*pref + cfg.actor_learning_rate * delta * grad).clamp(-bound, bound);
        }
        delta
    }
}

/// Evaluation acts greedily on the preferences.
impl Policy for ActorCriticTables {
    fn choose(&self, state: usize, _rng: &mut Rng) -> usize {
        argmax_lowest(self.preferences(state))
    }
}

/// One-step actor-critic over `action_set` with a softmax actor.
pub fn train_actor_critic<E: Environment + ?Sized>(
    env: &mut E,
    action_set: &ActionSet,
    cfg: &TrainConfig,
) -> Result<TrainOutput> {
    run(env, action_set, cfg, None)
}

pub fn train_actor_critic_traced<E: Environment + ?Sized>(
    env: &mut E,
    action_set: &ActionSet,
    cfg: &TrainConfig,
) -> Result<(TrainOutput, Trace)> {
    let mut trace = Trace::default();
    let out = run(env, action_set, cfg, Some(&mut trace))?;
    Ok((out, trace))
}

fn run<E: Environment + ?Sized>(
    env: &mut E,
    action_set: &ActionSet,
    cfg: &TrainConfig,
    mut trace: Option<&mut Trace>,
) -> Result<TrainOutput> {
    cfg.validate()?;
    super::check_action_set(env, action_set)?;
    let mut tables = ActorCriticTables::new(env.num_states(), action_set.len(), cfg.temperature);
    let mut counts = VisitCounts::new(env.num_states());
    let mut rng = cfg.policy_rng();
    let names = env.action_names();
    let mut curve = LearningCurve::new(cfg.seed, "actor_critic", &action_set.tag(&names));
    let (mut steps, mut decisions, mut episode) = (0u64, 0u64, 0u64);

    while steps < cfg.budget_steps {
        let reset_seed = cfg.episode_seed(episode);
        let mut s = env.reset(reset_seed);
        let mut ep_trace = trace.as_ref().map(|_| EpisodeTrace {
            reset_seed,
            decisions: Vec::new(),
        });
        let mut ep_return = 0.0;
        loop {
            let a = tables.sample(s, &mut rng);
            let mut bonus = 0.0;
            let out = execute_choice(env, action_set, a, |st| {
                bonus += curiosity_bonus(&mut counts, st.next_state, cfg.curiosity_scale);
            })?;
            steps += out.steps_used as u64;
            decisions += 1;
            ep_return += out.cumulative_reward;
            let reward = out.cumulative_reward + bonus;
            tables.update(s, a, reward, out.next_state, out.terminated, cfg);
            if let Some(t) = ep_trace.as_mut() {
                t.decisions.push(Decision {
                    state: s,
                    choice: a,
                    reward,
                    extrinsic: out.cumulative_reward,
                    next_state: out.next_state,
                    terminated: out.terminated,
                    steps_used: out.steps_used,
                });
            }
            s = out.next_state;
            if out.episode_over() {
                break;
            }
        }
        curve.push(steps, ep_return);
        if let (Some(t), Some(e)) = (trace.as_deref_mut(), ep_trace) {
            t.episodes.push(e);
        }
        episode += 1;
    }

    Ok(TrainOutput {
        agent: TrainedAgent::ActorCritic(tables),
        curve,
        total_steps: steps,
        total_decisions: decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    #[test]
    fn uniform_at_start() {
        let t = ActorCriticTables::new(2, 4, 1.0);
        for p in t.probabilities(1) {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn update_follows_softmax_gradient() {
        let cfg = TrainConfig::default();
        let mut t = ActorCriticTables::new(2, 2, 1.0);
        let delta = t.update(0, 1, 1.0, 1, true, &cfg);
        assert_eq!(delta, 1.0);
        assert!((t.value(0) - 0.1).abs() < 1e-15);
        // Uniform policy before the update: the gradient is ±0.5.
        assert!((t.preferences(0)[1] - 0.025).abs() < 1e-15);
        assert!((t.preferences(0)[0] + 0.025).abs() < 1e-15);
    }

    #[test]
    fn preferences_are_clamped() {
        let cfg = TrainConfig {
            actor_learning_rate: 1.0,
            logit_bound: 2.0,
            ..TrainConfig::default()
        };
        let mut t = ActorCriticTables::new(1, 2, 1.0);
        for _ in 0..100 {
            t.update(0, 0, 100.0, 0, true, &cfg);
        }
        assert!(t.preferences(0).iter().all(|p| p.abs() <= 2.0));
    }

    #[test]
    fn sampling_frequencies_follow_probabilities() {
        let mut t = ActorCriticTables::new(1, 3, 1.0);
        t.prefs = vec![0.0, 1.0, 2.0];
        let probs = t.probabilities(0);
        let mut rng = seeds::rng(1);
        let mut hits = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            hits[t.sample(0, &mut rng)] += 1;
        }
        for i in 0..3 {
            let f = hits[i] as f64 / n as f64;
            assert!((f - probs[i]).abs() < 0.01, "{i}: {f} vs {}", probs[i]);
        }
    }
}
