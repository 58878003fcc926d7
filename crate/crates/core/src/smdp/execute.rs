use serde::{Deserialize, Serialize};

use super::action::{ActionSet, Choice, MacroAction};
use crate::env::{Environment, StepResult};
use crate::error::{Error, Result};

/// Result of executing one decision (a macro or a single primitive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroOutcome {
    /// Undiscounted sum of the per-primitive rewards.
    pub cumulative_reward: f64,
    pub next_state: usize,
    /// Primitives actually executed, `1..=len`.
    pub steps_used: usize,
    /// The environment reached a terminal state.
    pub terminated: bool,
    /// The environment's step limit cut the episode.
    pub truncated: bool,
}

impl MacroOutcome {
    /// The episode ended during (or at the end of) this decision.
    pub fn episode_over(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Runs `macro_action` open loop, stopping early if the episode ends.
pub fn execute_macro<E: Environment + ?Sized>(env: &mut E, macro_action: &MacroAction) -> Result<MacroOutcome> {
    execute_macro_observed(env, macro_action, |_| {})
}

/// Like [`execute_macro`], calling `on_step` after every primitive.
pub fn execute_macro_observed<E, F>(env: &mut E, macro_action: &MacroAction, mut on_step: F) -> Result<MacroOutcome>
where
    E: Environment + ?Sized,
    F: FnMut(&StepResult),
{
    if env.is_done() {
        return Err(Error::IllegalCall("execute_macro on a finished episode"));
    }
    let mut outcome = MacroOutcome {
        cumulative_reward: 0.0,
        next_state: env.state(),
        steps_used: 0,
        terminated: false,
        truncated: false,
    };
    for &a in macro_action.actions() {
        let step = env.step(a)?;
        on_step(&step);
        outcome.cumulative_reward += step.reward;
        outcome.next_state = step.next_state;
        outcome.steps_used += 1;
        outcome.terminated = step.terminated;
        outcome.truncated = step.truncated;
        if step.terminated || step.truncated {
            break;
        }
    }
    Ok(outcome)
}

/// Executes action-set entry `index`: a single primitive or the macro.
pub fn execute_choice<E, F>(env: &mut E, action_set: &ActionSet, index: usize, mut on_step: F) -> Result<MacroOutcome>
where
    E: Environment + ?Sized,
    F: FnMut(&StepResult),
{
    match action_set.resolve(index) {
        Some(Choice::Primitive(a)) => {
            if env.is_done() {
                return Err(Error::IllegalCall("step on a finished episode"));
            }
            let step = env.step(a)?;
            on_step(&step);
            Ok(MacroOutcome {
                cumulative_reward: step.reward,
                next_state: step.next_state,
                steps_used: 1,
                terminated: step.terminated,
                truncated: step.truncated,
            })
        }
        Some(Choice::Macro(m)) => execute_macro_observed(env, m, on_step),
        None => Err(Error::InvalidAction {
            action: index,
            num_actions: action_set.len(),
        }),
    }
}

/// One-decision backup `reward_sum + γ · next_value`. The macro's length does
/// not enter: discounting happens between decisions.
#[inline]
pub fn macro_backup(reward_sum: f64, discount: f64, next_value: f64) -> f64 {
    reward_sum + discount * next_value
}
