use std::path::PathBuf;

use macroforge::env::Environment;
use macroforge::experiments::{run_experiment, ExperimentConfig, Mode};

use super::Source;
use crate::config::{load_experiment_config, GaOverrides};
use crate::error::CliResult;
use crate::macro_file::MacroFile;
use crate::manifest::RunManifest;
use crate::output::{write_file, write_with};

pub const COMMAND: &str = "experiment";
pub const REPORT_FILE: &str = "report.json";
pub const TRANSFER_FILE: &str = "transfer.csv";

pub struct ExperimentArgs {
    pub config: Option<PathBuf>,
    pub source: Source,
    pub overrides: GaOverrides,
    pub out: PathBuf,
}

/// Path of one run's learning curve inside the output directory.
pub fn curve_file(env: &str, arm: &str, seed: u64) -> String {
    format!("curves/{env}__{arm}__seed{seed}.csv")
}

/// Runs the configured protocol and writes the manifest, report, curves
/// and, when applicable, the generation artifacts and transfer table.
pub fn run(args: &ExperimentArgs) -> CliResult<String> {
    let manifest = args.source.manifest()?;
    let cfg: ExperimentConfig = match &manifest {
        Some(m) => {
            let cfg: ExperimentConfig = m.config_for(COMMAND)?;
            cfg.validate()?;
            cfg
        }
        None => load_experiment_config(super::require_config(args.config.as_deref())?, &args.overrides)?,
    };
    let ctx = cfg.environment.context()?;
    if let Some(m) = &manifest {
        m.verify_maps(&ctx.maps)?;
    }
    let seed = cfg.macro_override.is_none().then_some(cfg.generation.ga.master_seed);
    RunManifest::new(COMMAND, &cfg, Some(&ctx.maps), seed)?.write(&args.out)?;

    let output = run_experiment(&cfg)?;
    let report = &output.report;
    write_file(&args.out, REPORT_FILE, report.to_json()? + "\n")?;
    for r in &output.runs {
        write_with(&args.out, &curve_file(r.env.label(), &r.arm, r.seed), |buf| {
            Ok(r.curve.write_csv(buf)?)
        })?;
    }
    if report.mode == Mode::Transferability {
        write_with(&args.out, TRANSFER_FILE, |buf| Ok(report.write_transfer_csv(buf)?))?;
    }
    if let Some(gen) = &report.generation {
        let names = ctx.build(gen.env)?.action_names();
        let file = MacroFile {
            env: gen.env,
            learner: gen.learner,
            macro_action: gen.best_macro.clone(),
            fitness: gen.best_fitness,
            ga: gen.ga.clone(),
        };
        write_file(&args.out, super::generate::MACRO_FILE, file.to_json()?)?;
        write_with(&args.out, super::generate::GENERATIONS_FILE, |buf| {
            Ok(gen.log.write_csv(buf, &names)?)
        })?;
    }
    Ok(super::report::render(report))
}
