use rand::Rng as _;

use super::curiosity::{curiosity_bonus, VisitCounts};
use super::eval::Policy;
use super::{argmax_lowest, Decision, EpisodeTrace, LearningCurve, Trace, TrainConfig, TrainOutput, TrainedAgent};
use crate::env::Environment;
use crate::error::Result;
use crate::seeds::Rng;
use crate::smdp::{execute_choice, macro_backup, ActionSet};

/// Action values over the augmented action set, initialised to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_actions,
            values: vec![0.0; n_states * n_actions],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_states(&self) -> usize {
        self.values.len() / self.n_actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy(&self, s: usize) -> usize {
        argmax_lowest(self.row(s))
    }

    /// One semi-Markov backup. `reward` is the summed reward of the chosen
    /// option and the discount is applied once, whatever its length.
    /// Truncated transitions still bootstrap; only true termination does not.
    #[allow(clippy::too_many_arguments)]
    pub fn update(&mut self, s: usize, a: usize, reward: f64, next: usize, terminated: bool, alpha: f64, gamma: f64) {
        let target = if terminated {
            reward
        } else {
            macro_backup(reward, gamma, self.max(next))
        };
        let q = &mut self.values[s * self.n_actions + a];
        *q += alpha * (target - *q);
    }
}

impl Policy for QTable {
    fn choose(&self, state: usize, _rng: &mut Rng) -> usize {
        self.greedy(state)
    }
}

/// ε-greedy Q-learning over `action_set`.
pub fn train_q_learning<E: Environment + ?Sized>(
    env: &mut E,
    action_set: &ActionSet,
    cfg: &TrainConfig,
) -> Result<TrainOutput> {
    run(env, action_set, cfg, None)
}

/// As [`train_q_learning`], also returning every update it applied.
pub fn train_q_learning_traced<E: Environment + ?Sized>(
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
    let n = action_set.len();
    let mut q = QTable::new(env.num_states(), n);
    let mut counts = VisitCounts::new(env.num_states());
    let mut rng = cfg.policy_rng();
    let names = env.action_names();
    let mut curve = LearningCurve::new(cfg.seed, "q_learning", &action_set.tag(&names));
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
            let eps = cfg.epsilon_at(steps);
            let a = if rng.random::<f64>() < eps {
                rng.random_range(0..n)
            } else {
                q.greedy(s)
            };
            let mut bonus = 0.0;
            let out = execute_choice(env, action_set, a, |st| {
                bonus += curiosity_bonus(&mut counts, st.next_state, cfg.curiosity_scale);
            })?;
            steps += out.steps_used as u64;
            decisions += 1;
            ep_return += out.cumulative_reward;
            let reward = out.cumulative_reward + bonus;
            q.update(
                s,
                a,
                reward,
                out.next_state,
                out.terminated,
                cfg.learning_rate,
                cfg.discount,
            );
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
        agent: TrainedAgent::Q(q),
        curve,
        total_steps: steps,
        total_decisions: decisions,
    })
}
