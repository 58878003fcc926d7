//! Learners and evaluation checked against exact oracles on small corridors.

use std::sync::Arc;

use macroforge::env::maze::{load_map, MazeEnv, RewardSetting, Sparsity, MOVE_FORWARD};
use macroforge::env::{Environment, CORRIDOR3_MAP, CORRIDOR4_MAP};
use macroforge::learners::{evaluate_policy, LearnerKind, Policy, TrainConfig, UniformPolicy};
use macroforge::seeds::Rng;
use macroforge::smdp::{
    augment_action_space, build_explicit_mdp, greedy_policy, value_iteration, ActionSet, MacroAction, SolveOptions,
};
use proptest::prelude::*;

fn corridor(text: &str) -> MazeEnv {
    MazeEnv::new(Arc::new(load_map(text).unwrap()), RewardSetting::new(Sparsity::Sparse)).unwrap()
}

/// Mean and variance of `min(T, limit)` for the uniform random walk, where
/// `T` is the absorption time, from forward propagation of the state
/// distribution.
fn truncated_absorption(env: &MazeEnv, limit: usize) -> (f64, f64, f64) {
    let set = ActionSet::primitives_only(3);
    let mdp = build_explicit_mdp(env, &set).unwrap();
    let mut start = env.clone();
    let s0 = start.reset(0);
    let mut dist = vec![0.0; mdp.n_states()];
    dist[s0] = 1.0;
    let (mut first, mut second) = (0.0, 0.0);
    for t in 0..limit {
        let alive: f64 = (0..mdp.n_states())
            .filter(|&s| !mdp.is_terminal(s))
            .map(|s| dist[s])
            .sum();
        // E[X] = Σ P(X > t) and E[X²] = Σ (2t + 1) P(X > t).
        first += alive;
        second += (2 * t + 1) as f64 * alive;
        let mut next = vec![0.0; mdp.n_states()];
        for s in 0..mdp.n_states() {
            if mdp.is_terminal(s) {
                next[s] += dist[s];
                continue;
            }
            for a in 0..3 {
                for tr in mdp.row(s, a) {
                    next[tr.next] += dist[s] * tr.prob / 3.0;
                }
            }
        }
        dist = next;
    }
    let absorbed: f64 = (0..mdp.n_states())
        .filter(|&s| mdp.is_terminal(s))
        .map(|s| dist[s])
        .sum();
    (first, second - first * first, absorbed)
}

#[test]
fn random_walk_steps_match_absorption_time() {
    let mut env = corridor(CORRIDOR3_MAP);
    let limit = env.step_limit();
    let (mean, var, success) = truncated_absorption(&env, limit);
    let n = 4000;
    let stats = evaluate_policy(&mut env, &ActionSet::primitives_only(3), &UniformPolicy(3), n, 11).unwrap();
    let tol = 5.0 * (var / n as f64).sqrt();
    assert!(
        (stats.mean_steps_to_goal - mean).abs() < tol,
        "simulated {} vs exact {mean} (tolerance {tol})",
        stats.mean_steps_to_goal
    );
    let p_tol = 5.0 * (success * (1.0 - success) / n as f64).sqrt() + 1e-12;
    assert!((stats.success_rate - success).abs() <= p_tol);
}

/// Undiscounted return of following `policy` from the corridor's spawn.
fn rollout_return(env: &MazeEnv, set: &ActionSet, policy: &dyn Policy) -> f64 {
    evaluate_policy(&mut env.clone(), set, policy, 1, 0)
        .unwrap()
        .mean_return
}

struct Fixed(Vec<usize>);

impl Policy for Fixed {
    fn choose(&self, state: usize, _rng: &mut Rng) -> usize {
        self.0[state]
    }
}

#[test]
fn both_learners_reach_the_exact_optimum_on_corridors() {
    let macros = [None, Some(vec![MOVE_FORWARD, MOVE_FORWARD])];
    for map in [CORRIDOR3_MAP, CORRIDOR4_MAP] {
        let env = corridor(map);
        for m in &macros {
            let set = augment_action_space(3, m.clone().map(|a| MacroAction::new(a).unwrap())).unwrap();
            let mdp = build_explicit_mdp(&env, &set).unwrap();
            let v = value_iteration(&mdp, 0.99, &SolveOptions::default()).unwrap();
            let optimum = rollout_return(&env, &set, &Fixed(greedy_policy(&mdp, &v)));
            for learner in [LearnerKind::QLearning, LearnerKind::ActorCritic] {
                let cfg = TrainConfig {
                    budget_steps: 5_000,
                    curiosity_scale: 0.0,
                    seed: 3,
                    ..TrainConfig::default()
                };
                let out = learner.train(&mut env.clone(), &set, &cfg).unwrap();
                let got = rollout_return(&env, &set, &out.agent);
                assert!(
                    (got - optimum).abs() < 1e-12,
                    "{} with macro {m:?}: {got} vs optimum {optimum}",
                    learner.label()
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn budget_law_and_decision_count(
        budget in 1u64..4_000,
        seed in any::<u64>(),
        q_learning in any::<bool>(),
        macro_actions in prop::collection::vec(0usize..3, 1..5),
    ) {
        let mut env = corridor(CORRIDOR4_MAP);
        let set = augment_action_space(3, Some(MacroAction::new(macro_actions).unwrap())).unwrap();
        let learner = if q_learning { LearnerKind::QLearning } else { LearnerKind::ActorCritic };
        let cfg = TrainConfig { budget_steps: budget, seed, ..TrainConfig::default() };
        let out = learner.train(&mut env, &set, &cfg).unwrap();
        prop_assert!(out.total_steps >= budget);
        prop_assert!(out.total_steps <= budget + env.step_limit() as u64);
        prop_assert!(out.total_decisions <= out.total_steps);
        let ts: Vec<u64> = out.curve.points.iter().map(|p| p.timestep).collect();
        prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(ts.last().copied(), Some(out.total_steps));
    }
}
