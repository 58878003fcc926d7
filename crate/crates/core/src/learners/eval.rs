use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::seeds::{self, Rng};
use crate::smdp::{execute_choice, ActionSet};

/// Anything that picks an augmented-action index from a state.
pub trait Policy {
    fn choose(&self, state: usize, rng: &mut Rng) -> usize;
}

/// Uniformly random choice among `n` options.
#[derive(Clone, Copy, Debug)]
pub struct UniformPolicy(pub usize);

impl Policy for UniformPolicy {
    fn choose(&self, _state: usize, rng: &mut Rng) -> usize {
        rng.random_range(0..self.0)
    }
}

/// Summary of greedy evaluation episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub episodes: usize,
    pub mean_return: f64,
    /// Mean primitive steps per episode; episodes that never reach the goal
    /// count the full step limit.
    pub mean_steps_to_goal: f64,
    pub success_rate: f64,
}

/// Runs `episodes` evaluation episodes without learning.
pub fn evaluate_policy<E: Environment + ?Sized, P: Policy + ?Sized>(
    env: &mut E,
    action_set: &ActionSet,
    policy: &P,
    episodes: usize,
    seed: u64,
) -> Result<EvalStats> {
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let stream = seeds::stream_seed(seed, "eval");
    let mut rng = seeds::rng(seeds::stream_seed(seed, "eval-policy"));
    let (mut total_return, mut total_steps, mut successes) = (0.0, 0u64, 0usize);
    for e in 0..episodes {
        let mut s = env.reset(seeds::child_seed(stream, e as u64));
        let mut steps = 0u64;
        let mut ret = 0.0;
        loop {
            let a = policy.choose(s, &mut rng);
            let out = execute_choice(env, action_set, a, |_| {})?;
            steps += out.steps_used as u64;
            ret += out.cumulative_reward;
            s = out.next_state;
            if out.terminated {
                successes += 1;
                break;
            }
            if out.truncated {
                steps = env.step_limit() as u64;
                break;
            }
        }
        total_return += ret;
        total_steps += steps;
    }
    let n = episodes as f64;
    Ok(EvalStats {
        episodes,
        mean_return: total_return / n,
        mean_steps_to_goal: total_steps as f64 / n,
        success_rate: successes as f64 / n,
    })
}
