//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain strings and numbers and returns a JSON
//! document, so the page needs no generated TypeScript types. The `*_json`
//! functions hold the logic and are what the host-side tests exercise.
//! Exported integers are `u32` so that JavaScript numbers pass directly
//! (`u64` would require `BigInt` arguments).

use macroforge::env::maze::{MazeEnv, RewardSetting, Sparsity, Tile};
use macroforge::env::{EnvContext, EnvTag, Environment};
use macroforge::experiments::{aggregate_curves, run_arm, UtilizationSpec};
use macroforge::genetics::{generate_macro, GaConfig};
use macroforge::learners::{LearnerKind, TrainConfig};
use macroforge::smdp::{augment_action_space, build_explicit_mdp, value_iteration, MacroAction, SolveOptions};
use macroforge::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Config(e.to_string()))
}

/// Empty or blank text means "no macro".
fn parse_macro(text: &str, action_names: &[String]) -> Result<Option<MacroAction>> {
    if text.trim().is_empty() {
        return Ok(None);
    }
    MacroAction::parse_names(text, action_names).map(Some)
}

#[derive(Serialize)]
struct ValueMap {
    rows: usize,
    cols: usize,
    /// Row-major; `null` for walls, otherwise the best value over the eight
    /// facings of that cell.
    values: Vec<Option<f64>>,
    goal: (usize, usize),
    /// Fixed spawn of the chosen setting; absent for the dense setting.
    spawn: Option<(usize, usize)>,
    /// Optimal value at the spawn with primitives only and with the macro.
    spawn_value_vanilla: Option<f64>,
    spawn_value_macro: Option<f64>,
}

/// Optimal state values of a maze setting with `macro_names` added to the
/// action set.
pub fn value_map_json(env: &str, macro_names: &str, discount: f64) -> Result<String> {
    let tag = EnvTag::parse(env)?;
    let sparsity = tag
        .sparsity()
        .ok_or_else(|| Error::Config(format!("`{env}` is not a maze")))?;
    let ctx = EnvContext::default();
    let spec = ctx.maps.for_sparsity(sparsity);
    let mut maze = MazeEnv::new(spec.clone(), RewardSetting::new(sparsity))?;
    let m = parse_macro(macro_names, &maze.action_names())?;
    let opts = SolveOptions::default();
    let solve = |m: Option<MacroAction>| -> Result<Vec<f64>> {
        let set = augment_action_space(maze.num_actions(), m)?;
        let mdp = build_explicit_mdp(&maze, &set)?;
        Ok(value_iteration(&mdp, discount, &opts)?.values)
    };
    let with_macro = solve(m.clone())?;
    let vanilla = if m.is_some() { solve(None)? } else { with_macro.clone() };

    let mut values = vec![None; spec.rows() * spec.cols()];
    for (s, &v) in with_macro.iter().enumerate() {
        let ((r, c), _) = spec.decode(s);
        let slot = &mut values[r * spec.cols() + c];
        *slot = Some(slot.map_or(v, |best: f64| best.max(v)));
    }
    debug_assert!(values
        .iter()
        .enumerate()
        .all(|(i, v)| v.is_some() == (spec.tile((i / spec.cols(), i % spec.cols())) != Tile::Wall)));

    let (spawn, spawn_value_vanilla, spawn_value_macro) = if sparsity == Sparsity::Dense {
        (None, None, None)
    } else {
        let s = maze.reset(0);
        (Some(spec.decode(s).0), Some(vanilla[s]), Some(with_macro[s]))
    };
    json(&ValueMap {
        rows: spec.rows(),
        cols: spec.cols(),
        values,
        goal: spec.goal(),
        spawn,
        spawn_value_vanilla,
        spawn_value_macro,
    })
}

#[derive(Serialize)]
struct GenerationRow {
    generation: usize,
    avg_fitness: f64,
    best_fitness: f64,
    best: String,
}

#[derive(Serialize)]
struct GaSummary {
    best: String,
    best_fitness: f64,
    generations: Vec<GenerationRow>,
}

/// Runs the genetic macro search with `k` fitness evaluations.
pub fn generate_json(env: &str, learner: &str, k: usize, fitness_budget: u64, seed: u64) -> Result<String> {
    let tag = EnvTag::parse(env)?;
    let learner = LearnerKind::parse(learner)?;
    let ctx = EnvContext::default();
    let names = ctx.build(tag)?.action_names();
    let ga = GaConfig {
        k,
        fitness_budget_steps: fitness_budget,
        master_seed: seed,
        ..GaConfig::default()
    };
    let train = TrainConfig::default().for_env(tag);
    let out = generate_macro(&ga, learner, &train, || ctx.build(tag))?;
    json(&GaSummary {
        best: out.best.macro_action.display_names(&names),
        best_fitness: out.best.fitness,
        generations: out
            .log
            .entries
            .iter()
            .map(|e| GenerationRow {
                generation: e.generation,
                avg_fitness: e.avg_fitness,
                best_fitness: e.best.fitness,
                best: e.best.macro_action.display_names(&names),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct Band {
    mean: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    auc: f64,
    eval_mean_return: f64,
}

#[derive(Serialize)]
struct Comparison {
    timesteps: Vec<f64>,
    vanilla: Band,
    #[serde(rename = "macro")]
    with_macro: Band,
}

/// Learning curves of the vanilla and macro-augmented agents over `seeds`
/// independent runs.
pub fn compare_json(env: &str, learner: &str, macro_names: &str, budget: u64, seeds: u64) -> Result<String> {
    let tag = EnvTag::parse(env)?;
    let learner = LearnerKind::parse(learner)?;
    let ctx = EnvContext::default();
    let names = ctx.build(tag)?.action_names();
    let m = parse_macro(macro_names, &names)?.ok_or_else(|| Error::Config("enter a macro to compare".into()))?;
    if seeds < 2 {
        return Err(Error::Config(
            "at least two seeds are needed for a confidence band".into(),
        ));
    }
    let util = UtilizationSpec {
        learner,
        envs: vec![tag],
        train: TrainConfig {
            budget_steps: budget,
            ..TrainConfig::default()
        },
        seeds: (0..seeds).collect(),
        eval_episodes: 20,
        buckets: 50,
        ..UtilizationSpec::default()
    };
    let band = |arm: Option<&MacroAction>, label: &str| -> Result<(Vec<f64>, Band)> {
        let runs = run_arm(&ctx, tag, learner, label, arm, &util)?;
        let curves: Vec<_> = runs.iter().map(|r| r.curve.clone()).collect();
        let agg = aggregate_curves(&curves, util.buckets, budget)?;
        let eval_mean_return = runs.iter().map(|r| r.eval.mean_return).sum::<f64>() / runs.len() as f64;
        Ok((
            agg.buckets.iter().map(|b| b.timestep).collect(),
            Band {
                mean: agg.buckets.iter().map(|b| b.mean).collect(),
                lo: agg.buckets.iter().map(|b| b.ci_lo()).collect(),
                hi: agg.buckets.iter().map(|b| b.ci_hi()).collect(),
                auc: agg.auc()?,
                eval_mean_return,
            },
        ))
    };
    let (timesteps, vanilla) = band(None, "vanilla")?;
    let (_, with_macro) = band(Some(&m), "macro")?;
    json(&Comparison {
        timesteps,
        vanilla,
        with_macro,
    })
}

/// Primitive action names of an environment, as a JSON array.
#[wasm_bindgen]
pub fn action_names(env: &str) -> std::result::Result<String, JsError> {
    to_js(
        EnvTag::parse(env)
            .and_then(|t| EnvContext::default().build(t))
            .and_then(|e| json(&e.action_names())),
    )
}

#[wasm_bindgen]
pub fn value_map(env: &str, macro_names: &str, discount: f64) -> std::result::Result<String, JsError> {
    to_js(value_map_json(env, macro_names, discount))
}

#[wasm_bindgen]
pub fn generate(
    env: &str,
    learner: &str,
    k: usize,
    fitness_budget: u32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(generate_json(env, learner, k, fitness_budget.into(), seed.into()))
}

#[wasm_bindgen]
pub fn compare(
    env: &str,
    learner: &str,
    macro_names: &str,
    budget: u32,
    seeds: u32,
) -> std::result::Result<String, JsError> {
    to_js(compare_json(env, learner, macro_names, budget.into(), seeds.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn value_map_covers_floor_and_orders_spawn_values() {
        let v = parse(&value_map_json("sparse", "MOVE_FORWARD,MOVE_FORWARD", 0.99).unwrap());
        let (rows, cols) = (v["rows"].as_u64().unwrap(), v["cols"].as_u64().unwrap());
        assert_eq!(v["values"].as_array().unwrap().len() as u64, rows * cols);
        assert!(v["values"][0].is_null(), "corner is a wall");
        let (van, mac) = (
            v["spawn_value_vanilla"].as_f64().unwrap(),
            v["spawn_value_macro"].as_f64().unwrap(),
        );
        assert!(mac >= van - 1e-8);
        assert!(parse(&value_map_json("dense", "", 0.9).unwrap())["spawn"].is_null());
        assert!(value_map_json("risk_corridor", "", 0.9).is_err());
        assert!(value_map_json("sparse", "JUMP", 0.9).is_err());
    }

    #[test]
    fn generate_reports_every_generation() {
        let v = parse(&generate_json("risk_corridor", "q_learning", 12, 2_000, 1).unwrap());
        let gens = v["generations"].as_array().unwrap();
        assert_eq!(gens.len(), 2);
        assert_eq!(v["best"], gens[1]["best"]);
    }

    #[test]
    fn compare_returns_two_aligned_bands() {
        let v = parse(&compare_json("risk_corridor", "q_learning", "FORWARD,FORWARD", 3_000, 2).unwrap());
        let n = v["timesteps"].as_array().unwrap().len();
        assert_eq!(n, 50);
        for arm in ["vanilla", "macro"] {
            for key in ["mean", "lo", "hi"] {
                assert_eq!(v[arm][key].as_array().unwrap().len(), n);
            }
        }
        assert!(compare_json("risk_corridor", "q_learning", "", 3_000, 2).is_err());
        assert!(compare_json("risk_corridor", "q_learning", "FORWARD", 3_000, 1).is_err());
    }
}
