use std::path::PathBuf;

use macroforge::env::maze::Sparsity;
use macroforge::env::{AnyEnv, EnvTag, Environment};
use macroforge::experiments::EnvironmentSpec;
use macroforge::learners::{evaluate_policy, EvalStats, Policy};
use macroforge::seeds::Rng;
use macroforge::smdp::{
    augment_action_space, build_explicit_mdp, greedy_policy, value_iteration, Enumerable, MacroAction, SolveOptions,
};
use serde::{Deserialize, Serialize};

use super::Source;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::write_file;
use crate::table::Table;

pub const COMMAND: &str = "solve";
pub const SOLVE_FILE: &str = "solve.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub env: EnvTag,
    pub environment: EnvironmentSpec,
    /// Macro as action names; only the primitive arm is solved when absent.
    pub macro_action: Option<Vec<String>>,
    pub discount: f64,
    /// Greedy rollouts of each optimal policy.
    pub episodes: usize,
}

/// Optimal values and greedy rollouts of one action set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedArm {
    pub name: String,
    pub macro_action: Option<Vec<String>>,
    /// Mean optimal value over the start distribution.
    pub start_value: f64,
    pub greedy: EvalStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub env: EnvTag,
    pub discount: f64,
    pub num_states: usize,
    pub start_states: usize,
    pub arms: Vec<SolvedArm>,
}

pub struct SolveArgs {
    pub config: Option<SolveConfig>,
    pub source: Source,
    pub out: PathBuf,
}

struct Greedy(Vec<usize>);

impl Policy for Greedy {
    fn choose(&self, state: usize, _rng: &mut Rng) -> usize {
        self.0[state]
    }
}

/// Solves the tabular model of an environment with and without the macro.
pub fn run(args: &SolveArgs) -> CliResult<String> {
    let manifest = args.source.manifest()?;
    let cfg = match (&manifest, &args.config) {
        (Some(m), _) => m.config_for::<SolveConfig>(COMMAND)?,
        (None, Some(c)) => c.clone(),
        (None, None) => return Err(CliError::Config("solve needs --env or --manifest".into())),
    };
    if cfg.episodes == 0 {
        return Err(CliError::Config("--episodes must be positive".into()));
    }
    let ctx = cfg.environment.context()?;
    if let Some(m) = &manifest {
        m.verify_maps(&ctx.maps)?;
    }
    RunManifest::new(COMMAND, &cfg, Some(&ctx.maps), None)?.write(&args.out)?;

    let result = match ctx.build(cfg.env)? {
        AnyEnv::Maze(mut env) => {
            let starts = if env.setting().sparsity == Sparsity::Dense {
                let spec = env.spec();
                spec.dense_spawns()
                    .flat_map(|c| (0..macroforge::env::maze::ORIENTATIONS as u8).map(move |o| (c, o)))
                    .map(|(c, o)| spec.encode(c, o))
                    .collect()
            } else {
                vec![env.reset(0)]
            };
            solve(&mut env, &cfg, &starts)?
        }
        AnyEnv::Risk(mut env) => {
            let start = env.reset(0);
            solve(&mut env, &cfg, &[start])?
        }
        AnyEnv::Tabular(_) => unreachable!("EnvContext never builds a tabular environment"),
    };
    write_file(&args.out, SOLVE_FILE, serde_json::to_string_pretty(&result)? + "\n")?;
    Ok(render(&result))
}

fn solve<E: Environment + Enumerable>(env: &mut E, cfg: &SolveConfig, starts: &[usize]) -> CliResult<SolveResult> {
    let names = env.action_names();
    let mut arms = vec![("primitives", None)];
    if let Some(m) = &cfg.macro_action {
        arms.push(("macro", Some(MacroAction::from_names(m, &names)?)));
    }
    let mut solved = Vec::new();
    for (name, m) in arms {
        let set = augment_action_space(env.num_actions(), m.clone())?;
        let mdp = build_explicit_mdp(env, &set)?;
        let values = value_iteration(&mdp, cfg.discount, &SolveOptions::default())?;
        let start_value = starts.iter().map(|&s| values.values[s]).sum::<f64>() / starts.len() as f64;
        let policy = Greedy(greedy_policy(&mdp, &values));
        let greedy = evaluate_policy(env, &set, &policy, cfg.episodes, 0)?;
        solved.push(SolvedArm {
            name: name.to_string(),
            macro_action: m.map(|m| m.to_names(&names)),
            start_value,
            greedy,
        });
    }
    Ok(SolveResult {
        env: cfg.env,
        discount: cfg.discount,
        num_states: env.tabular_states(),
        start_states: starts.len(),
        arms: solved,
    })
}

fn render(r: &SolveResult) -> String {
    let mut t = Table::new(["action set", "start value", "greedy return", "greedy steps", "success"]);
    for a in &r.arms {
        let label = match &a.macro_action {
            Some(m) => format!("{} + {}", a.name, m.join(",")),
            None => a.name.clone(),
        };
        t.push([
            label,
            format!("{:.6}", a.start_value),
            format!("{:.4}", a.greedy.mean_return),
            format!("{:.2}", a.greedy.mean_steps_to_goal),
            format!("{:.2}", a.greedy.success_rate),
        ]);
    }
    format!(
        "{} ({} states, {} start states, discount {})\n{}",
        r.env.label(),
        r.num_states,
        r.start_states,
        r.discount,
        t.render()
    )
}
