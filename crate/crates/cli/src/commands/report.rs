use std::path::{Path, PathBuf};

use macroforge::env::{EnvContext, Environment};
use macroforge::experiments::{Report, MACRO, VANILLA};
use serde::{Deserialize, Serialize};

use super::Source;
use crate::config::read_text;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::write_file;
use crate::svg::{line_chart, Series};
use crate::table::Table;

pub const COMMAND: &str = "report";
pub const TABLES_FILE: &str = "tables.txt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Absolute paths of the report JSON files.
    pub inputs: Vec<PathBuf>,
    pub svg: bool,
}

pub struct ReportArgs {
    pub inputs: Vec<PathBuf>,
    pub svg: bool,
    pub source: Source,
    pub out: PathBuf,
}

pub fn plot_file(stem: &str, env: &str, arm: &str) -> String {
    format!("{stem}__{env}__{arm}.csv")
}

pub fn svg_file(stem: &str, env: &str) -> String {
    format!("{stem}__{env}.svg")
}

/// `<parent dir>_<file stem>`, e.g. `validation_report` for
/// `runs/validation/report.json`.
pub fn output_stem(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    match path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
        Some(dir) => format!("{dir}_{stem}"),
        None => stem.to_string(),
    }
}

pub fn load_report(path: &Path) -> CliResult<Report> {
    Report::from_json(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Renders tables for each report and writes per-arm plot data and,
/// optionally, one SVG chart per comparison.
pub fn run(args: &ReportArgs) -> CliResult<String> {
    let cfg = match args.source.manifest()? {
        Some(m) => m.config_for::<ReportConfig>(COMMAND)?,
        None => {
            if args.inputs.is_empty() {
                return Err(CliError::Config("no report files given".into()));
            }
            let inputs = args
                .inputs
                .iter()
                .map(|p| {
                    p.canonicalize()
                        .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
                })
                .collect::<CliResult<Vec<_>>>()?;
            ReportConfig { inputs, svg: args.svg }
        }
    };
    let mut loaded: Vec<(String, Report)> = Vec::new();
    for path in &cfg.inputs {
        let stem = output_stem(path);
        if loaded.iter().any(|(s, _)| *s == stem) {
            return Err(CliError::Config(format!("two inputs map to the output name `{stem}`")));
        }
        loaded.push((stem, load_report(path)?));
    }
    RunManifest::new(COMMAND, &cfg, None, None)?.write(&args.out)?;

    let mut text = String::new();
    for (stem, report) in &loaded {
        text += &format!("== {stem}\n");
        text += &render(report);
        text += "\n";
        write_plot_data(&args.out, stem, report, cfg.svg)?;
    }
    write_file(&args.out, TABLES_FILE, &text)?;
    Ok(text)
}

fn write_plot_data(out: &Path, stem: &str, report: &Report, svg: bool) -> CliResult<()> {
    for c in &report.comparisons {
        let mut series = Vec::new();
        for arm in &c.arms {
            let mut csv = String::from("timestep,mean,ci_lo,ci_hi\n");
            for b in &arm.curve.buckets {
                csv += &format!("{},{},{},{}\n", b.timestep, b.mean, b.ci_lo(), b.ci_hi());
            }
            write_file(out, &plot_file(stem, c.env.label(), &arm.name), csv)?;
            series.push(Series {
                name: arm.name.clone(),
                points: arm.curve.buckets.iter().map(|b| (b.timestep, b.mean)).collect(),
            });
        }
        if svg {
            let title = format!("{} / {} / {}", report.mode.label(), c.env.label(), c.learner.label());
            write_file(out, &svg_file(stem, c.env.label()), line_chart(&title, &series))?;
        }
    }
    Ok(())
}

/// Human-readable tables: generation log, per-environment arm summaries and
/// the steps-to-goal reduction table. Reduction inputs are printed with
/// full precision so they match the report exactly.
pub fn render(report: &Report) -> String {
    let mut s = format!(
        "mode: {}\nmacro: {} ({})\nseeds: {:?}, budget: {} steps, evaluation: {} episodes\n\n",
        report.mode.label(),
        report.macro_action.join(","),
        report.macro_source,
        report.fairness.seeds,
        report.fairness.budget_steps,
        report.fairness.eval_episodes,
    );
    if let Some(g) = &report.generation {
        // Action names are fixed per environment type, whatever the map.
        let names = EnvContext::default()
            .build(g.env)
            .map(|e| e.action_names())
            .unwrap_or_default();
        let t = super::generate::generation_table(&g.log, &names);
        s += &format!(
            "generation ({} on {}):\n{}\n",
            g.learner.label(),
            g.env.label(),
            t.render()
        );
    }
    if let Some(r) = &report.repeat_baseline {
        s += &format!("repeat baseline: {}\n\n", r.macro_action.join(","));
    }
    for c in &report.comparisons {
        let mut t = Table::new(["arm", "AUC", "AUC - vanilla", "mean return", "mean steps", "success"]);
        for arm in &c.arms {
            let diff = c
                .auc_difference
                .iter()
                .find(|d| d.arm == arm.name)
                .map(|d| format!("{:+.4} ± {:.4}", d.mean, d.ci_half_width))
                .unwrap_or_else(|| if arm.name == VANILLA { "-".into() } else { String::new() });
            t.push([
                arm.name.clone(),
                format!("{:.4}", arm.auc),
                diff,
                format!("{:.4}", arm.eval.mean_return),
                format!("{:.2}", arm.eval.mean_steps_to_goal),
                format!("{:.2}", arm.eval.success_rate),
            ]);
        }
        s += &format!("{} ({}):\n{}\n", c.env.label(), c.learner.label(), t.render());
    }
    s += &reduction_table(report).render();
    s
}

pub fn reduction_table(report: &Report) -> Table {
    let mut t = Table::new(["task", "vanilla_mean_steps", "macro_mean_steps", "reduction_pct"]);
    for c in &report.comparisons {
        let steps = |name: &str| {
            c.arm(name)
                .map(|a| a.eval.mean_steps_to_goal.to_string())
                .unwrap_or_default()
        };
        t.push([
            c.env.label().to_string(),
            steps(VANILLA),
            steps(MACRO),
            c.reduction_pct.to_string(),
        ]);
    }
    t
}
