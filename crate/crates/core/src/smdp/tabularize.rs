use super::action::{ActionSet, Choice};
use super::mdp::{ExplicitMdp, Transition};
use crate::error::{Error, Result};

/// Largest state space [`build_explicit_mdp`] will tabularize.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A deterministic, finite environment whose dynamics can be queried for any
/// state without simulating an episode.
pub trait Enumerable {
    fn tabular_states(&self) -> usize;
    fn tabular_actions(&self) -> usize;
    fn is_terminal_state(&self, state: usize) -> bool;
    /// `(next_state, reward)` of taking primitive `action` in `state`.
    fn transition(&self, state: usize, action: usize) -> Result<(usize, f64)>;
}

/// Tabularizes `env` over `action_set`. Macro rows follow the primitive
/// dynamics for `len` steps, summing rewards and stopping at the first
/// terminal state.
pub fn build_explicit_mdp<E: Enumerable + ?Sized>(env: &E, action_set: &ActionSet) -> Result<ExplicitMdp> {
    build_explicit_mdp_capped(env, action_set, DEFAULT_STATE_CAP)
}

pub fn build_explicit_mdp_capped<E: Enumerable + ?Sized>(
    env: &E,
    action_set: &ActionSet,
    cap: usize,
) -> Result<ExplicitMdp> {
    let n_states = env.tabular_states();
    if n_states > cap {
        return Err(Error::TooLarge {
            what: "state count",
            size: n_states as u128,
            cap: cap as u128,
        });
    }
    if action_set.num_primitives() != env.tabular_actions() {
        return Err(Error::Config(format!(
            "action set has {} primitives, environment has {}",
            action_set.num_primitives(),
            env.tabular_actions()
        )));
    }
    let n_actions = action_set.len();
    let mut rows = Vec::with_capacity(n_states * n_actions);
    let mut terminal = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let is_term = env.is_terminal_state(s);
        terminal.push(is_term);
        for idx in 0..n_actions {
            let (next, reward) = if is_term {
                (s, 0.0)
            } else {
                match action_set.resolve(idx) {
                    Some(Choice::Primitive(a)) => env.transition(s, a)?,
                    Some(Choice::Macro(m)) => {
                        let (mut cur, mut total) = (s, 0.0);
                        for &a in m.actions() {
                            let (n, r) = env.transition(cur, a)?;
                            total += r;
                            cur = n;
                            if env.is_terminal_state(cur) {
                                break;
                            }
                        }
                        (cur, total)
                    }
                    None => unreachable!("index below action_set.len()"),
                }
            };
            rows.push(vec![Transition {
                next,
                prob: 1.0,
                reward,
            }]);
        }
    }
    ExplicitMdp::new(n_states, n_actions, rows, terminal)
}

/// Adds elapsed time to the state so a step limit becomes part of the
/// dynamics: state `t * n + s` for `t` in `0..=horizon`, with the whole last
/// layer terminal.
pub struct HorizonExpanded<'a, E: ?Sized> {
    inner: &'a E,
    horizon: usize,
}

impl<'a, E: Enumerable + ?Sized> HorizonExpanded<'a, E> {
    pub fn new(inner: &'a E, horizon: usize) -> Self {
        Self { inner, horizon }
    }

    pub fn encode(&self, elapsed: usize, state: usize) -> usize {
        elapsed * self.inner.tabular_states() + state
    }
}

impl<E: Enumerable + ?Sized> Enumerable for HorizonExpanded<'_, E> {
    fn tabular_states(&self) -> usize {
        (self.horizon + 1) * self.inner.tabular_states()
    }

    fn tabular_actions(&self) -> usize {
        self.inner.tabular_actions()
    }

    fn is_terminal_state(&self, state: usize) -> bool {
        let n = self.inner.tabular_states();
        state / n >= self.horizon || self.inner.is_terminal_state(state % n)
    }

    fn transition(&self, state: usize, action: usize) -> Result<(usize, f64)> {
        let n = self.inner.tabular_states();
        let (t, s) = (state / n, state % n);
        let (next, reward) = self.inner.transition(s, action)?;
        Ok(((t + 1).min(self.horizon) * n + next, reward))
    }
}
