//! Exact dynamic-programming solvers over an [`ExplicitMdp`].
//!
//! These back the test oracles and the `solve` command; they favour clarity
//! over speed (synchronous sweeps, max-norm stopping).

use super::execute::macro_backup;
use super::mdp::{ExplicitMdp, TabularPolicy, ValueTable};
use crate::error::{Error, Result};

/// Upper bound on `|M|^|S|` for [`enumerate_policies`].
pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop once the max-norm change of a sweep falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 1_000_000,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

fn check_args(discount: f64, opts: &SolveOptions) -> Result<()> {
    if !(0.0..=1.0).contains(&discount) {
        return Err(Error::Config(format!("discount {discount} is outside [0, 1]")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("tolerance {} must be positive", opts.tol)));
    }
    Ok(())
}

fn action_value(mdp: &ExplicitMdp, values: &[f64], discount: f64, s: usize, a: usize) -> f64 {
    mdp.row(s, a)
        .iter()
        .map(|t| t.prob * macro_backup(t.reward, discount, values[t.next]))
        .sum()
}

/// Evaluates `policy`: the fixed point of
/// `V(s) = Σ_m ν(s,m) [ r_s^m + γ Σ_s' p_ss'^m V(s') ]`.
pub fn policy_evaluation(
    mdp: &ExplicitMdp,
    policy: &TabularPolicy,
    discount: f64,
    opts: &SolveOptions,
) -> Result<ValueTable> {
    check_args(discount, opts)?;
    if policy.n_states() != mdp.n_states() {
        return Err(Error::InvalidPolicy(format!(
            "policy covers {} states, MDP has {}",
            policy.n_states(),
            mdp.n_states()
        )));
    }
    if (0..mdp.n_states()).any(|s| policy.probs(s).len() != mdp.n_actions()) {
        return Err(Error::InvalidPolicy("row width differs from the action count".into()));
    }
    sweep_until_stable(mdp, discount, opts, |values, s| {
        policy
            .probs(s)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, &p)| p * action_value(mdp, values, discount, s, a))
            .sum()
    })
}

/// Optimal values `V*(s) = max_m [ r_s^m + γ Σ_s' p_ss'^m V*(s') ]`.
pub fn value_iteration(mdp: &ExplicitMdp, discount: f64, opts: &SolveOptions) -> Result<ValueTable> {
    check_args(discount, opts)?;
    sweep_until_stable(mdp, discount, opts, |values, s| {
        (0..mdp.n_actions())
            .map(|a| action_value(mdp, values, discount, s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

fn sweep_until_stable<F>(mdp: &ExplicitMdp, discount: f64, opts: &SolveOptions, backup: F) -> Result<ValueTable>
where
    F: Fn(&[f64], usize) -> f64,
{
    let n = mdp.n_states();
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        residual = 0.0;
        for s in 0..n {
            next[s] = if mdp.is_terminal(s) { 0.0 } else { backup(&values, s) };
            residual = f64::max(residual, (next[s] - values[s]).abs());
        }
        std::mem::swap(&mut values, &mut next);
        if !residual.is_finite() {
            break;
        }
        if residual < opts.tol {
            return Ok(ValueTable { values, discount });
        }
    }
    Err(Error::Divergence {
        sweeps: opts.max_sweeps,
        residual,
    })
}

/// Action values `Q(s, m)` under `values`.
pub fn q_values(mdp: &ExplicitMdp, values: &ValueTable) -> Vec<Vec<f64>> {
    (0..mdp.n_states())
        .map(|s| {
            (0..mdp.n_actions())
                .map(|a| action_value(mdp, &values.values, values.discount, s, a))
                .collect()
        })
        .collect()
}

/// Greedy action per state. Ties (within 1e-12) go to the lowest index.
pub fn greedy_policy(mdp: &ExplicitMdp, values: &ValueTable) -> Vec<usize> {
    q_values(mdp, values)
        .iter()
        .map(|row| {
            let mut best = 0;
            for (a, &q) in row.iter().enumerate().skip(1) {
                if q > row[best] + 1e-12 {
                    best = a;
                }
            }
            best
        })
        .collect()
}

/// Brute-force optimum: the element-wise max of [`policy_evaluation`] over
/// every stationary deterministic policy. Test oracle for
/// [`value_iteration`].
pub fn enumerate_policies(mdp: &ExplicitMdp, discount: f64, cap: u128) -> Result<ValueTable> {
    let n_states = mdp.n_states();
    let n_actions = mdp.n_actions();
    let count = (n_actions as u128)
        .checked_pow(n_states as u32)
        .filter(|&c| c <= cap)
        .ok_or(Error::TooLarge {
            what: "deterministic policy count",
            size: (n_actions as f64).powi(n_states as i32).min(u128::MAX as f64) as u128,
            cap,
        })?;
    let opts = SolveOptions::with_tol(1e-13);
    let mut best = vec![f64::NEG_INFINITY; n_states];
    let mut choice = vec![0usize; n_states];
    for _ in 0..count {
        let policy = TabularPolicy::deterministic(&choice, n_actions);
        let v = policy_evaluation(mdp, &policy, discount, &opts)?;
        for (b, x) in best.iter_mut().zip(&v.values) {
            *b = b.max(*x);
        }
        // Odometer increment over the choice vector.
        for c in choice.iter_mut() {
            *c += 1;
            if *c < n_actions {
                break;
            }
            *c = 0;
        }
    }
    Ok(ValueTable { values: best, discount })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use crate::smdp::mdp::{random_mdp, Transition};
    use crate::smdp::MacroAction;

    fn det(next: usize, reward: f64) -> Vec<Transition> {
        vec![Transition {
            next,
            prob: 1.0,
            reward,
        }]
    }

    #[test]
    fn single_terminal_state_is_zero() {
        let mdp = ExplicitMdp::new(1, 1, vec![det(0, 0.0)], vec![true]).unwrap();
        let pol = TabularPolicy::uniform(1, 1);
        let v = policy_evaluation(&mdp, &pol, 0.9, &SolveOptions::default()).unwrap();
        assert_eq!(v.values, vec![0.0]);
    }

    #[test]
    fn two_state_chain() {
        let mdp = ExplicitMdp::new(2, 1, vec![det(1, 1.0), det(1, 0.0)], vec![false, true]).unwrap();
        let pol = TabularPolicy::deterministic(&[0, 0], 1);
        let v = policy_evaluation(&mdp, &pol, 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(v.values, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_rewards_give_zero_values() {
        let rows = vec![det(1, 0.0), det(0, 0.0), det(0, 0.0), det(1, 0.0)];
        let mdp = ExplicitMdp::new(2, 2, rows, vec![false, false]).unwrap();
        let v = value_iteration(&mdp, 0.9, &SolveOptions::default()).unwrap();
        assert_eq!(v.values, vec![0.0, 0.0]);
    }

    #[test]
    fn undiscounted_loop_diverges() {
        let mdp = ExplicitMdp::new(1, 1, vec![det(0, 1.0)], vec![false]).unwrap();
        let opts = SolveOptions {
            tol: 1e-10,
            max_sweeps: 100,
        };
        assert!(matches!(
            value_iteration(&mdp, 1.0, &opts),
            Err(Error::Divergence { sweeps: 100, .. })
        ));
    }

    #[test]
    fn one_state_two_actions() {
        // Rewards 1 and 3 into the terminal: optimum is the larger action.
        let rows = vec![det(1, 1.0), det(1, 3.0), det(1, 0.0), det(1, 0.0)];
        let mdp = ExplicitMdp::new(2, 2, rows, vec![false, true]).unwrap();
        let v = enumerate_policies(&mdp, 0.9, DEFAULT_POLICY_CAP).unwrap();
        assert_eq!(v.values[0], 3.0);
        assert_eq!(
            greedy_policy(&mdp, &value_iteration(&mdp, 0.9, &SolveOptions::default()).unwrap()),
            vec![1, 0]
        );
    }

    #[test]
    fn enumeration_cap() {
        let mut rng = seeds::rng(0);
        let mdp = random_mdp(&mut rng, 12, 4, 1);
        assert!(matches!(
            enumerate_policies(&mdp, 0.9, DEFAULT_POLICY_CAP),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let rows = vec![det(1, 1.0), det(1, 1.0), det(1, 0.0), det(1, 0.0)];
        let mdp = ExplicitMdp::new(2, 2, rows, vec![false, true]).unwrap();
        let v = value_iteration(&mdp, 0.9, &SolveOptions::default()).unwrap();
        assert_eq!(greedy_policy(&mdp, &v)[0], 0);
    }

    /// Dense linear solve of `(I - γ P_ν) V = r_ν`, independent of the sweeps.
    fn linear_solve(mdp: &ExplicitMdp, policy: &TabularPolicy, discount: f64) -> Vec<f64> {
        let n = mdp.n_states();
        let mut a = nalgebra::DMatrix::<f64>::identity(n, n);
        let mut b = nalgebra::DVector::<f64>::zeros(n);
        for s in 0..n {
            if mdp.is_terminal(s) {
                continue;
            }
            for (m, &p) in policy.probs(s).iter().enumerate() {
                for t in mdp.row(s, m) {
                    a[(s, t.next)] -= discount * p * t.prob;
                    b[s] += p * t.prob * t.reward;
                }
            }
        }
        a.lu().solve(&b).unwrap().iter().copied().collect()
    }

    #[test]
    fn policy_evaluation_matches_linear_solve() {
        let mut rng = seeds::rng(42);
        for _ in 0..20 {
            let mdp = random_mdp(&mut rng, 6, 2, 1)
                .with_macro(&MacroAction::new(vec![1, 0, 1]).unwrap())
                .unwrap();
            let mut probs = Vec::new();
            for _ in 0..6 {
                let w: Vec<f64> = (0..3).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
                let t: f64 = w.iter().sum();
                let mut row: Vec<f64> = w.iter().map(|x| x / t).collect();
                let s: f64 = row.iter().sum();
                row[0] += 1.0 - s;
                probs.push(row);
            }
            let pol = TabularPolicy::new(probs).unwrap();
            let v = policy_evaluation(&mdp, &pol, 0.9, &SolveOptions::default()).unwrap();
            let exact = linear_solve(&mdp, &pol, 0.9);
            for (x, y) in v.values.iter().zip(&exact) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }
}
