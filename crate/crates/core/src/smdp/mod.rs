//! Macro actions over a primitive action space and the semi-Markov decision
//! process they induce.
//!
//! An agent chooses from `M = A ∪ {m}`. Choosing the macro executes its
//! primitives back to back with no intermediate decision; the learner sees the
//! summed reward and the state where the macro ended. Discounting is applied
//! between decisions, never inside a macro, so a backup is
//! `reward_sum + γ · V(next)` regardless of how many primitives ran.

mod action;
mod execute;
mod mdp;
mod solve;
mod tabularize;

pub use action::{augment_action_space, ActionSet, Choice, MacroAction};
pub use execute::{execute_choice, execute_macro, execute_macro_observed, macro_backup, MacroOutcome};
pub use mdp::{random_mdp, ExplicitMdp, TabularPolicy, Transition, ValueTable};
pub use solve::{
    enumerate_policies, greedy_policy, policy_evaluation, q_values, value_iteration, SolveOptions, DEFAULT_POLICY_CAP,
};
pub use tabularize::{build_explicit_mdp, Enumerable, HorizonExpanded, DEFAULT_STATE_CAP};
