use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::action::MacroAction;
use crate::error::{Error, Result};
use crate::seeds::Rng;

const PROB_TOL: f64 = 1e-12;

/// One outgoing edge of a `(state, action)` row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub next: usize,
    pub prob: f64,
    /// Expected reward of the decision given that it ends in `next`.
    pub reward: f64,
}

/// A finite MDP stored as explicit tables, one row per
/// `(state, action-set index)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitMdp {
    n_states: usize,
    n_actions: usize,
    rows: Vec<Vec<Transition>>,
    terminal: Vec<bool>,
}

impl ExplicitMdp {
    /// `rows[s * n_actions + a]` holds the outgoing transitions of `(s, a)`.
    ///
    /// Terminal states must self-loop with reward 0 under every action.
    pub fn new(n_states: usize, n_actions: usize, rows: Vec<Vec<Transition>>, terminal: Vec<bool>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        if rows.len() != n_states * n_actions || terminal.len() != n_states {
            return Err(Error::InvalidMdp(format!(
                "expected {} rows and {} terminal flags, got {} and {}",
                n_states * n_actions,
                n_states,
                rows.len(),
                terminal.len()
            )));
        }
        for (idx, row) in rows.iter().enumerate() {
            let (s, a) = (idx / n_actions, idx % n_actions);
            let mut total = 0.0;
            for t in row {
                if t.next >= n_states {
                    return Err(Error::InvalidMdp(format!("({s},{a}) points to state {}", t.next)));
                }
                if !(t.prob >= 0.0) || !t.reward.is_finite() {
                    return Err(Error::InvalidMdp(format!("({s},{a}) has a bad edge {t:?}")));
                }
                total += t.prob;
            }
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidMdp(format!("({s},{a}) probabilities sum to {total}")));
            }
            if terminal[s] && row.iter().any(|t| t.prob > 0.0 && (t.next != s || t.reward != 0.0)) {
                return Err(Error::InvalidMdp(format!(
                    "terminal state {s} must self-loop with reward 0"
                )));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            rows,
            terminal,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, state: usize, action: usize) -> &[Transition] {
        &self.rows[state * self.n_actions + action]
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    /// Expected reward `r_s^a` of one decision.
    pub fn expected_reward(&self, state: usize, action: usize) -> f64 {
        self.row(state, action).iter().map(|t| t.prob * t.reward).sum()
    }

    /// Adds `macro_action` as a new last action whose rows compose the
    /// primitive rows of actions `0..n_primitives` for `len` steps with summed
    /// rewards. Terminal states absorb, so paths that terminate early stop
    /// accumulating reward.
    pub fn with_macro(&self, macro_action: &MacroAction) -> Result<Self> {
        macro_action.validate(self.n_actions)?;
        let n_actions = self.n_actions + 1;
        let mut rows = Vec::with_capacity(self.n_states * n_actions);
        // dist[s'] = (probability, probability-weighted reward sum)
        let mut dist = vec![(0.0f64, 0.0f64); self.n_states];
        let mut next = vec![(0.0f64, 0.0f64); self.n_states];
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                rows.push(self.row(s, a).to_vec());
            }
            dist.iter_mut().for_each(|d| *d = (0.0, 0.0));
            dist[s] = (1.0, 0.0);
            for &a in macro_action.actions() {
                next.iter_mut().for_each(|d| *d = (0.0, 0.0));
                for (from, &(p, wr)) in dist.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for t in self.row(from, a) {
                        let q = p * t.prob;
                        next[t.next].0 += q;
                        next[t.next].1 += wr * t.prob + q * t.reward;
                    }
                }
                std::mem::swap(&mut dist, &mut next);
            }
            let row = dist
                .iter()
                .enumerate()
                .filter(|(_, &(p, _))| p > 0.0)
                .map(|(next, &(p, wr))| Transition {
                    next,
                    prob: p,
                    reward: wr / p,
                })
                .collect();
            rows.push(row);
        }
        Self::new(self.n_states, n_actions, rows, self.terminal.clone())
    }

    /// Drops every action with index `>= n` (e.g. strips a macro column).
    pub fn restrict_actions(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_actions {
            return Err(Error::InvalidMdp(format!(
                "cannot keep {n} of {} actions",
                self.n_actions
            )));
        }
        let rows = (0..self.n_states)
            .flat_map(|s| (0..n).map(move |a| (s, a)))
            .map(|(s, a)| self.row(s, a).to_vec())
            .collect();
        Self::new(self.n_states, n, rows, self.terminal.clone())
    }
}

/// A random MDP with `n_terminal` absorbing states (the last ones), sparse
/// stochastic rows and rewards in `[-1, 1]`.
pub fn random_mdp(rng: &mut Rng, n_states: usize, n_actions: usize, n_terminal: usize) -> ExplicitMdp {
    assert!(n_terminal < n_states, "need at least one non-terminal state");
    let terminal: Vec<bool> = (0..n_states).map(|s| s >= n_states - n_terminal).collect();
    let mut rows = Vec::with_capacity(n_states * n_actions);
    for (s, &is_terminal) in terminal.iter().enumerate() {
        for _ in 0..n_actions {
            if is_terminal {
                rows.push(vec![Transition {
                    next: s,
                    prob: 1.0,
                    reward: 0.0,
                }]);
                continue;
            }
            let fanout = rng.random_range(1..=n_states.min(3));
            let mut targets: Vec<usize> = Vec::with_capacity(fanout);
            while targets.len() < fanout {
                let t = rng.random_range(0..n_states);
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let weights: Vec<f64> = (0..fanout).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut row: Vec<Transition> = targets
                .iter()
                .zip(&weights)
                .map(|(&next, &w)| Transition {
                    next,
                    prob: w / total,
                    reward: rng.random_range(-1.0..1.0),
                })
                .collect();
            // Absorb the rounding error so rows sum to 1 within tolerance.
            let sum: f64 = row.iter().map(|t| t.prob).sum();
            row[0].prob += 1.0 - sum;
            rows.push(row);
        }
    }
    ExplicitMdp::new(n_states, n_actions, rows, terminal).expect("random MDP is well formed")
}

/// State values together with the discount they were computed under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub discount: f64,
}

impl ValueTable {
    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-state probability vectors over action-set indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    probs: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (s, row) in probs.iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidPolicy(format!("state {s} has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy(format!("state {s} sums to {total}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            probs: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        let probs = actions
            .iter()
            .map(|&a| {
                let mut row = vec![0.0; n_actions];
                row[a] = 1.0;
                row
            })
            .collect();
        Self { probs }
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self, state: usize) -> &[f64] {
        &self.probs[state]
    }
}
