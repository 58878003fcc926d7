use rand::Rng as _;

use super::{Environment, StepResult};
use crate::error::{Error, Result};
use crate::seeds::{self, Rng};
use crate::smdp::ExplicitMdp;

/// Simulates a (possibly stochastic) [`ExplicitMdp`] as a live environment.
///
/// Every action of the MDP is exposed as a primitive. Episodes start in
/// `start` and sample successors from a stream reseeded on every reset.
#[derive(Clone, Debug)]
pub struct TabularEnv {
    mdp: ExplicitMdp,
    start: usize,
    step_limit: usize,
    state: usize,
    steps: usize,
    done: bool,
    rng: Rng,
}

impl TabularEnv {
    pub fn new(mdp: ExplicitMdp, start: usize, step_limit: usize) -> Result<Self> {
        if start >= mdp.n_states() || mdp.is_terminal(start) {
            return Err(Error::Config(format!(
                "start state {start} must be a non-terminal state"
            )));
        }
        Ok(Self {
            mdp,
            start,
            step_limit,
            state: start,
            steps: 0,
            done: false,
            rng: seeds::rng(0),
        })
    }

    pub fn mdp(&self) -> &ExplicitMdp {
        &self.mdp
    }
}

impl Environment for TabularEnv {
    fn num_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    fn action_names(&self) -> Vec<String> {
        (0..self.mdp.n_actions()).map(|a| format!("a{a}")).collect()
    }

    fn num_states(&self) -> usize {
        self.mdp.n_states()
    }

    fn step_limit(&self) -> usize {
        self.step_limit
    }

    fn reset(&mut self, seed: u64) -> usize {
        self.rng = seeds::rng(seed);
        self.state = self.start;
        self.steps = 0;
        self.done = false;
        self.state
    }

    fn state(&self) -> usize {
        self.state
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::IllegalCall("step on a finished episode"));
        }
        if action >= self.mdp.n_actions() {
            return Err(Error::InvalidAction {
                action,
                num_actions: self.mdp.n_actions(),
            });
        }
        let row = self.mdp.row(self.state, action);
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut pick = row[row.len() - 1];
        for t in row {
            acc += t.prob;
            if u < acc {
                pick = *t;
                break;
            }
        }
        self.state = pick.next;
        self.steps += 1;
        let terminated = self.mdp.is_terminal(pick.next);
        let truncated = !terminated && self.steps >= self.step_limit;
        self.done = terminated || truncated;
        Ok(StepResult {
            next_state: pick.next,
            reward: pick.reward,
            terminated,
            truncated,
        })
    }
}
