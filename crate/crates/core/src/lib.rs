//! Macro-action toolkit for tabular reinforcement learning.
//!
//! A macro action is an open-loop sequence of primitive actions that an agent
//! selects as a single decision. This crate covers the full workflow around
//! them:
//!
//! * [`smdp`]: macro-augmented action sets, macro execution, and exact
//!   dynamic-programming solvers where discounting applies once per decision.
//! * [`env`]: an orientation-based grid maze with four reward-sparsity
//!   settings and a risk corridor, behind the [`env::Environment`] trait.
//! * [`learners`]: tabular Q-learning, tabular actor-critic and a count-based
//!   exploration bonus, all operating over augmented action sets.
//! * [`genetics`]: the genetic search that generates a macro by repeatedly
//!   training agents with candidate macros.
//! * [`experiments`]: validation, reusability and transferability protocols
//!   with seed aggregation and confidence intervals.

// Validation uses `!(x > 0.0)` style checks on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod experiments;
pub mod genetics;
pub mod learners;
mod parallel;
pub mod seeds;
pub mod smdp;

pub use error::{Error, Result};
pub use smdp::{ActionSet, MacroAction, MacroOutcome};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
