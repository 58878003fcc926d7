//! The macro-utilization stage.
//!
//! An experiment optionally generates a macro with the genetic search, then
//! trains agents with and without it over a shared seed list and compares
//! aggregated learning curves, areas under them, and greedy evaluation
//! statistics of the final policies. Three protocols differ only in which
//! learner and environments the second stage uses.

mod config;
mod report;
mod stats;

pub use config::{EnvironmentSpec, ExperimentConfig, GenerationSpec, Mode, UtilizationSpec};
pub use report::{
    ArmReport, Comparison, EvalSummary, ExperimentOutput, Fairness, GenerationSummary, PairedDifference,
    RepeatSelection, Report, RunRecord, REPORT_SCHEMA_VERSION,
};
pub use stats::{
    aggregate_curves, auc, bucket_curve, bucket_edges, mean_ci95, reduction_pct, AggregatedCurve, BucketStat,
};

use crate::env::{EnvContext, EnvTag, Environment};
use crate::error::{Error, Result};
use crate::genetics::{fitness, generate_macro};
use crate::learners::{evaluate_policy, LearnerKind};
use crate::seeds;
use crate::smdp::{augment_action_space, MacroAction};

/// Arm names used in reports.
pub const VANILLA: &str = "vanilla";
pub const MACRO: &str = "macro";
pub const REPEAT: &str = "repeat";

/// Trains `learner` on `tag` once per seed in `util.seeds` and evaluates
/// each final policy. `macro_action = None` is the vanilla arm.
pub fn run_arm(
    ctx: &EnvContext,
    tag: EnvTag,
    learner: LearnerKind,
    arm: &str,
    macro_action: Option<&MacroAction>,
    util: &UtilizationSpec,
) -> Result<Vec<RunRecord>> {
    crate::parallel::try_map(&util.seeds, |&seed| {
        run_one(ctx, tag, learner, arm, macro_action, util, seed)
    })
}

fn run_one(
    ctx: &EnvContext,
    tag: EnvTag,
    learner: LearnerKind,
    arm: &str,
    macro_action: Option<&MacroAction>,
    util: &UtilizationSpec,
    seed: u64,
) -> Result<RunRecord> {
    let mut env = ctx.build(tag)?;
    let set = augment_action_space(env.num_actions(), macro_action.cloned())?;
    let mut train = util.train.for_env(tag);
    train.seed = seed;
    let out = learner.train(&mut env, &set, &train)?;
    let eval = evaluate_policy(
        &mut env,
        &set,
        &out.agent,
        util.eval_episodes,
        seeds::stream_seed(seed, "final-eval"),
    )?;
    Ok(RunRecord {
        env: tag,
        learner,
        arm: arm.to_string(),
        seed,
        total_steps: out.total_steps,
        curve: out.curve,
        eval,
    })
}

/// Dispatches on `cfg.mode`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.mode {
        Mode::Validation => run_validation(cfg),
        Mode::Reusability => run_reusability(cfg),
        Mode::Transferability => run_transferability(cfg),
    }
}

pub fn run_validation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_mode(cfg, Mode::Validation)?;
    run(cfg)
}

pub fn run_reusability(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_mode(cfg, Mode::Reusability)?;
    run(cfg)
}

pub fn run_transferability(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_mode(cfg, Mode::Transferability)?;
    run(cfg)
}

fn expect_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::Config(format!(
            "expected a {} config, got {}",
            mode.label(),
            cfg.mode.label()
        )));
    }
    cfg.validate()
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ctx = cfg.environment.context()?;
    let g = &cfg.generation;
    let u = &cfg.utilization;
    let names = ctx.build(g.env)?.action_names();

    let (macro_action, generation) = match &cfg.macro_override {
        Some(list) => (MacroAction::from_names(list, &names)?, None),
        None => {
            let train = g.train.for_env(g.env);
            let outcome = generate_macro(&g.ga, g.learner, &train, || ctx.build(g.env))?;
            let summary = GenerationSummary::new(g, &outcome, &names);
            (outcome.best.macro_action.clone(), Some(summary))
        }
    };
    macro_action.validate(names.len())?;

    let repeat = if u.repeat_baseline {
        Some(best_repeat_macro(&ctx, g, u, macro_action.len(), &names)?)
    } else {
        None
    };

    let mut arms: Vec<(&str, Option<MacroAction>)> = vec![(VANILLA, None), (MACRO, Some(macro_action.clone()))];
    if let Some(r) = &repeat {
        arms.push((REPEAT, Some(MacroAction::from_names(&r.macro_action, &names)?)));
    }

    let mut jobs = Vec::new();
    for &tag in &u.envs {
        for (arm, m) in &arms {
            for &seed in &u.seeds {
                jobs.push((tag, *arm, m.clone(), seed));
            }
        }
    }
    let runs = crate::parallel::try_map(&jobs, |(tag, arm, m, seed)| {
        run_one(&ctx, *tag, u.learner, arm, m.as_ref(), u, *seed)
    })?;

    let mut comparisons = Vec::new();
    for &tag in &u.envs {
        let step_limit = ctx.build(tag)?.step_limit();
        let mut arm_reports = Vec::new();
        for (arm, m) in &arms {
            let arm_runs: Vec<&RunRecord> = runs.iter().filter(|r| r.env == tag && r.arm == *arm).collect();
            arm_reports.push(ArmReport::build(arm, m.as_ref(), &arm_runs, u, &names)?);
        }
        comparisons.push(Comparison::build(tag, u.learner, step_limit, arm_reports)?);
    }

    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        toolkit_version: crate::VERSION.to_string(),
        mode: cfg.mode,
        macro_action: macro_action.to_names(&names),
        macro_source: if cfg.macro_override.is_some() {
            "override"
        } else {
            "generated"
        }
        .to_string(),
        generation,
        repeat_baseline: repeat,
        fairness: Fairness {
            seeds: u.seeds.clone(),
            budget_steps: u.train.budget_steps,
            eval_episodes: u.eval_episodes,
            buckets: u.buckets,
        },
        comparisons,
    };
    Ok(ExperimentOutput { report, runs })
}

/// Scores every action-repeat macro of length `len` with the fitness
/// function and returns the best (lowest action id on ties).
fn best_repeat_macro(
    ctx: &EnvContext,
    g: &GenerationSpec,
    u: &UtilizationSpec,
    len: usize,
    names: &[String],
) -> Result<RepeatSelection> {
    let stream = seeds::stream_seed(g.ga.master_seed, "repeat");
    let mut jobs = Vec::new();
    for a in 0..names.len() {
        for t in 0..u.repeat_trials {
            jobs.push((a, t));
        }
    }
    let scores = crate::parallel::try_map(&jobs, |&(a, t)| {
        let mut env = ctx.build(g.env)?;
        let mut train = g.train.for_env(g.env);
        train.budget_steps = g.ga.fitness_budget_steps;
        train.seed = seeds::child_seed(stream, t as u64);
        fitness(
            &mut env,
            u.learner,
            &MacroAction::repeat(a, len)?,
            &train,
            g.ga.fitness_floor,
        )
    })?;
    let per_action: Vec<f64> = (0..names.len())
        .map(|a| {
            let s = &scores[a * u.repeat_trials..(a + 1) * u.repeat_trials];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let best = crate::learners::argmax_lowest(&per_action);
    Ok(RepeatSelection {
        macro_action: MacroAction::repeat(best, len)?.to_names(names),
        candidates: (0..names.len())
            .map(|a| {
                (
                    MacroAction::repeat(a, len).expect("len >= 1").display_names(names),
                    per_action[a],
                )
            })
            .collect(),
    })
}
