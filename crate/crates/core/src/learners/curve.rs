use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Cumulative primitive steps at the end of the episode.
    pub timestep: u64,
    /// Extrinsic (environment) return; exploration bonuses are excluded.
    pub episode_return: f64,
}

/// Episode returns of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub seed: u64,
    pub method: String,
    pub action_set: String,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn new(seed: u64, method: &str, action_set: &str) -> Self {
        Self {
            seed,
            method: method.to_string(),
            action_set: action_set.to_string(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, timestep: u64, episode_return: f64) {
        debug_assert!(self.points.last().is_none_or(|p| p.timestep < timestep));
        self.points.push(CurvePoint {
            timestep,
            episode_return,
        });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean return of the last `n` episodes (all of them if fewer).
    pub fn tail_mean(&self, n: usize) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let tail = &self.points[self.points.len().saturating_sub(n)..];
        Some(tail.iter().map(|p| p.episode_return).sum::<f64>() / tail.len() as f64)
    }

    /// Writes `timestep,episode_return,seed,method,action_set` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestep", "episode_return", "seed", "method", "action_set"])?;
        for p in &self.points {
            w.write_record([
                p.timestep.to_string(),
                p.episode_return.to_string(),
                self.seed.to_string(),
                self.method.clone(),
                self.action_set.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
