//! Risk corridor: a looping track where obstacles punish careless forward
//! moves.
//!
//! `FORWARD` advances one cell. Entering an armed obstacle costs
//! `crash_penalty` and sends the agent back to the start; the episode goes
//! on. `DODGE` disarms the obstacle directly ahead for the next step only, so
//! passing takes `DODGE` immediately followed by `FORWARD`, which pays
//! `pass_reward`. Running off the end of the track restarts it and rewards
//! keep accumulating until the step limit.

use serde::{Deserialize, Serialize};

use super::{Environment, StepResult};
use crate::error::{Error, Result};
use crate::smdp::Enumerable;

pub const FORWARD: usize = 0;
pub const DODGE: usize = 1;
pub const NOOP: usize = 2;
pub const ACTION_NAMES: [&str; 3] = ["FORWARD", "DODGE", "NOOP"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskCorridorSpec {
    pub track_length: usize,
    pub obstacles: Vec<usize>,
    pub crash_penalty: f64,
    pub pass_reward: f64,
    pub step_limit: usize,
}

impl Default for RiskCorridorSpec {
    fn default() -> Self {
        Self {
            track_length: 12,
            obstacles: vec![4, 8],
            crash_penalty: -1.0,
            pass_reward: 1.0,
            step_limit: 200,
        }
    }
}

impl RiskCorridorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.obstacles.is_empty() {
            return Err(Error::Config("risk corridor needs at least one obstacle".into()));
        }
        if let Some(o) = self.obstacles.iter().find(|&&o| o == 0 || o + 1 >= self.track_length) {
            return Err(Error::Config(format!(
                "obstacle at {o} is not strictly inside a track of length {}",
                self.track_length
            )));
        }
        if !(self.crash_penalty < 0.0) || !(self.pass_reward > 0.0) || self.step_limit == 0 {
            return Err(Error::Config(
                "need crash_penalty < 0, pass_reward > 0 and a positive step_limit".into(),
            ));
        }
        Ok(())
    }

    fn is_obstacle(&self, pos: usize) -> bool {
        self.obstacles.contains(&pos)
    }

    pub fn num_states(&self) -> usize {
        self.track_length * 2
    }

    /// Tabular id of `(position, dodging)`.
    pub fn encode(&self, pos: usize, dodging: bool) -> usize {
        pos * 2 + usize::from(dodging)
    }

    pub fn decode(&self, state: usize) -> (usize, bool) {
        (state / 2, state % 2 == 1)
    }

    /// `((position, dodging), reward)` after one primitive.
    pub fn transition(&self, pos: usize, dodging: bool, action: usize) -> Result<((usize, bool), f64)> {
        match action {
            FORWARD => {
                let next = (pos + 1) % self.track_length;
                if !self.is_obstacle(next) {
                    Ok(((next, false), 0.0))
                } else if dodging {
                    Ok(((next, false), self.pass_reward))
                } else {
                    Ok(((0, false), self.crash_penalty))
                }
            }
            DODGE => Ok(((pos, true), 0.0)),
            NOOP => Ok(((pos, false), 0.0)),
            _ => Err(Error::InvalidAction {
                action,
                num_actions: ACTION_NAMES.len(),
            }),
        }
    }
}

/// Start state id of an episode. The track always starts at cell 0; the seed
/// is accepted for interface symmetry.
pub fn risk_reset(spec: &RiskCorridorSpec, _seed: u64) -> usize {
    spec.encode(0, false)
}

#[derive(Clone, Debug)]
pub struct RiskCorridor {
    spec: RiskCorridorSpec,
    pos: usize,
    dodging: bool,
    steps: usize,
}

impl RiskCorridor {
    pub fn new(spec: RiskCorridorSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            pos: 0,
            dodging: false,
            steps: 0,
        })
    }

    pub fn spec(&self) -> &RiskCorridorSpec {
        &self.spec
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

impl Environment for RiskCorridor {
    fn num_actions(&self) -> usize {
        ACTION_NAMES.len()
    }

    fn action_names(&self) -> Vec<String> {
        ACTION_NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn num_states(&self) -> usize {
        self.spec.num_states()
    }

    fn step_limit(&self) -> usize {
        self.spec.step_limit
    }

    fn reset(&mut self, seed: u64) -> usize {
        let (pos, dodging) = self.spec.decode(risk_reset(&self.spec, seed));
        self.pos = pos;
        self.dodging = dodging;
        self.steps = 0;
        self.state()
    }

    fn state(&self) -> usize {
        self.spec.encode(self.pos, self.dodging)
    }

    fn is_done(&self) -> bool {
        self.steps >= self.spec.step_limit
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::IllegalCall("step on a finished episode"));
        }
        let ((pos, dodging), reward) = self.spec.transition(self.pos, self.dodging, action)?;
        self.pos = pos;
        self.dodging = dodging;
        self.steps += 1;
        Ok(StepResult {
            next_state: self.state(),
            reward,
            terminated: false,
            truncated: self.steps >= self.spec.step_limit,
        })
    }
}

impl Enumerable for RiskCorridor {
    fn tabular_states(&self) -> usize {
        self.spec.num_states()
    }

    fn tabular_actions(&self) -> usize {
        ACTION_NAMES.len()
    }

    fn is_terminal_state(&self, _state: usize) -> bool {
        false
    }

    fn transition(&self, state: usize, action: usize) -> Result<(usize, f64)> {
        let (pos, dodging) = self.spec.decode(state);
        let ((p, d), r) = self.spec.transition(pos, dodging, action)?;
        Ok((self.spec.encode(p, d), r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> RiskCorridor {
        let mut e = RiskCorridor::new(RiskCorridorSpec::default()).unwrap();
        e.reset(0);
        e
    }

    #[test]
    fn forward_into_armed_obstacle_crashes() {
        let mut e = env();
        for _ in 0..3 {
            assert_eq!(e.step(FORWARD).unwrap().reward, 0.0);
        }
        let r = e.step(FORWARD).unwrap();
        assert_eq!(r.reward, -1.0);
        assert_eq!(e.position(), 0);
        assert!(!r.terminated);
    }

    #[test]
    fn dodge_then_forward_passes() {
        let mut e = env();
        for _ in 0..3 {
            e.step(FORWARD).unwrap();
        }
        e.step(DODGE).unwrap();
        let r = e.step(FORWARD).unwrap();
        assert_eq!(r.reward, 1.0);
        assert_eq!(e.position(), 4);
    }

    #[test]
    fn dodge_lasts_one_step() {
        let mut e = env();
        e.step(FORWARD).unwrap();
        e.step(FORWARD).unwrap();
        e.step(DODGE).unwrap();
        e.step(FORWARD).unwrap();
        assert_eq!(e.step(FORWARD).unwrap().reward, -1.0);
    }

    #[test]
    fn track_restarts_and_episode_truncates() {
        let spec = RiskCorridorSpec {
            step_limit: 5,
            ..RiskCorridorSpec::default()
        };
        let mut e = RiskCorridor::new(spec).unwrap();
        e.reset(0);
        for _ in 0..4 {
            assert!(!e.step(NOOP).unwrap().truncated);
        }
        assert!(e.step(NOOP).unwrap().truncated);
        assert!(e.step(NOOP).is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = RiskCorridorSpec {
            obstacles: vec![],
            ..RiskCorridorSpec::default()
        };
        assert!(RiskCorridor::new(bad).is_err());
        let edge = RiskCorridorSpec {
            obstacles: vec![11],
            ..RiskCorridorSpec::default()
        };
        assert!(RiskCorridor::new(edge).is_err());
        assert!(env().step(7).is_err());
    }
}
