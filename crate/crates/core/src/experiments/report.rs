use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{GenerationSpec, Mode, UtilizationSpec};
use super::stats::{aggregate_curves, auc, bucket_curve, bucket_edges, mean_ci95, reduction_pct, AggregatedCurve};
use super::{MACRO, VANILLA};
use crate::env::EnvTag;
use crate::error::{Error, Result};
use crate::genetics::{GaConfig, GaOutcome, GenerationLog};
use crate::learners::{EvalStats, LearnerKind, LearningCurve};
use crate::smdp::MacroAction;

/// Bumped whenever the JSON layout of [`Report`] changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One training run of one arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env: EnvTag,
    pub learner: LearnerKind,
    pub arm: String,
    pub seed: u64,
    pub total_steps: u64,
    pub curve: LearningCurve,
    pub eval: EvalStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub report: Report,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub mode: Mode,
    /// The utilized macro as action names.
    pub macro_action: Vec<String>,
    /// `"generated"` or `"override"`.
    pub macro_source: String,
    pub generation: Option<GenerationSummary>,
    pub repeat_baseline: Option<RepeatSelection>,
    pub fairness: Fairness,
    pub comparisons: Vec<Comparison>,
}

/// Settings every arm of the report shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fairness {
    pub seeds: Vec<u64>,
    pub budget_steps: u64,
    pub eval_episodes: usize,
    pub buckets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub learner: LearnerKind,
    pub env: EnvTag,
    pub ga: GaConfig,
    pub best_macro: Vec<String>,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub log: GenerationLog,
}

impl GenerationSummary {
    pub fn new(spec: &GenerationSpec, outcome: &GaOutcome, names: &[String]) -> Self {
        Self {
            learner: spec.learner,
            env: spec.env,
            ga: spec.ga.clone(),
            best_macro: outcome.best.macro_action.to_names(names),
            best_fitness: outcome.best.fitness,
            evaluations: outcome.evaluated.len(),
            log: outcome.log.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatSelection {
    pub macro_action: Vec<String>,
    /// `(comma-joined macro, mean fitness)` for every candidate.
    pub candidates: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mean_return: f64,
    pub mean_steps_to_goal: f64,
    pub success_rate: f64,
    pub per_seed: Vec<EvalStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    pub macro_action: Option<Vec<String>>,
    pub curve: AggregatedCurve,
    /// AUC of the mean curve.
    pub auc: f64,
    /// AUC of each seed's bucketed curve, in seed-list order.
    pub seed_auc: Vec<f64>,
    pub eval: EvalSummary,
}

impl ArmReport {
    pub fn build(
        name: &str,
        macro_action: Option<&MacroAction>,
        runs: &[&RunRecord],
        util: &UtilizationSpec,
        names: &[String],
    ) -> Result<Self> {
        let budget = util.train.budget_steps;
        let curves: Vec<LearningCurve> = runs.iter().map(|r| r.curve.clone()).collect();
        let curve = aggregate_curves(&curves, util.buckets, budget)?;
        let edges = bucket_edges(util.buckets, budget);
        let seed_auc = curves
            .iter()
            .map(|c| {
                let ys = bucket_curve(c, util.buckets, budget)?;
                auc(&edges.iter().copied().zip(ys).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let n = runs.len() as f64;
        let per_seed: Vec<EvalStats> = runs.iter().map(|r| r.eval.clone()).collect();
        let eval = EvalSummary {
            mean_return: per_seed.iter().map(|e| e.mean_return).sum::<f64>() / n,
            mean_steps_to_goal: per_seed.iter().map(|e| e.mean_steps_to_goal).sum::<f64>() / n,
            success_rate: per_seed.iter().map(|e| e.success_rate).sum::<f64>() / n,
            per_seed,
        };
        Ok(Self {
            name: name.to_string(),
            macro_action: macro_action.map(|m| m.to_names(names)),
            auc: curve.auc()?,
            curve,
            seed_auc,
            eval,
        })
    }
}

/// Per-seed difference `arm − vanilla` with its 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedDifference {
    pub arm: String,
    pub mean: f64,
    pub ci_half_width: f64,
    pub per_seed: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub env: EnvTag,
    pub learner: LearnerKind,
    pub step_limit: usize,
    pub arms: Vec<ArmReport>,
    /// AUC differences of every non-vanilla arm against vanilla.
    pub auc_difference: Vec<PairedDifference>,
    /// Steps-to-goal change of the macro arm relative to vanilla, in
    /// percent; negative means fewer steps.
    pub reduction_pct: f64,
}

impl Comparison {
    pub fn build(env: EnvTag, learner: LearnerKind, step_limit: usize, arms: Vec<ArmReport>) -> Result<Self> {
        let find = |name: &str| {
            arms.iter()
                .find(|a| a.name == name)
                .ok_or_else(|| Error::Statistics(format!("comparison is missing the `{name}` arm")))
        };
        let vanilla = find(VANILLA)?;
        let with_macro = find(MACRO)?;
        let mut auc_difference = Vec::new();
        for arm in arms.iter().filter(|a| a.name != VANILLA) {
            let per_seed: Vec<f64> = arm.seed_auc.iter().zip(&vanilla.seed_auc).map(|(a, v)| a - v).collect();
            let (mean, half) = mean_ci95(&per_seed)?;
            auc_difference.push(PairedDifference {
                arm: arm.name.clone(),
                mean,
                ci_half_width: half,
                per_seed,
            });
        }
        let reduction = reduction_pct(vanilla.eval.mean_steps_to_goal, with_macro.eval.mean_steps_to_goal);
        Ok(Self {
            env,
            learner,
            step_limit,
            auc_difference,
            reduction_pct: reduction,
            arms,
        })
    }

    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.name == name)
    }
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("cannot serialize report: {e}")))
    }

    /// Parses a report, rejecting other schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("report is not valid JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Config(format!(
                    "report schema version {v} is not supported (expected {REPORT_SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Config("report has no schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("malformed report: {e}")))
    }

    /// Writes `task,vanilla_mean_steps,macro_mean_steps,reduction_pct`, one
    /// row per utilization environment.
    pub fn write_transfer_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["task", "vanilla_mean_steps", "macro_mean_steps", "reduction_pct"])?;
        for c in &self.comparisons {
            let steps = |name: &str| {
                c.arm(name)
                    .map(|a| a.eval.mean_steps_to_goal.to_string())
                    .unwrap_or_default()
            };
            w.write_record([
                c.env.label().to_string(),
                steps(VANILLA),
                steps(MACRO),
                c.reduction_pct.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
