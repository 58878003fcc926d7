use std::path::{Path, PathBuf};

use macroforge::env::Environment;
use macroforge::genetics::{generate_macro, GaOutcome, GenerationLog};

use super::Source;
use crate::config::{load_generate_config, GaOverrides, GenerateConfig};
use crate::error::CliResult;
use crate::macro_file::MacroFile;
use crate::manifest::RunManifest;
use crate::output::{write_file, write_with};
use crate::table::Table;

pub const COMMAND: &str = "generate";
pub const MACRO_FILE: &str = "macro.json";
pub const GENERATIONS_FILE: &str = "generations.csv";
pub const EVALUATIONS_FILE: &str = "evaluations.csv";

pub struct GenerateArgs {
    pub config: Option<PathBuf>,
    pub source: Source,
    pub overrides: GaOverrides,
    pub out: PathBuf,
}

/// Runs the genetic search and writes the manifest, macro file, generation
/// log and every fitness evaluation. Returns the rendered summary.
pub fn run(args: &GenerateArgs) -> CliResult<String> {
    let manifest = args.source.manifest()?;
    let cfg: GenerateConfig = match &manifest {
        Some(m) => {
            let cfg: GenerateConfig = m.config_for(COMMAND)?;
            cfg.validate()?;
            cfg
        }
        None => load_generate_config(super::require_config(args.config.as_deref())?, &args.overrides)?,
    };
    let ctx = cfg.environment.context()?;
    if let Some(m) = &manifest {
        m.verify_maps(&ctx.maps)?;
    }
    let g = &cfg.generation;
    RunManifest::new(COMMAND, &cfg, Some(&ctx.maps), Some(g.ga.master_seed))?.write(&args.out)?;

    let names = ctx.build(g.env)?.action_names();
    let train = g.train.for_env(g.env);
    let outcome = generate_macro(&g.ga, g.learner, &train, || ctx.build(g.env))?;

    let file = MacroFile {
        env: g.env,
        learner: g.learner,
        macro_action: outcome.best.macro_action.to_names(&names),
        fitness: outcome.best.fitness,
        ga: g.ga.clone(),
    };
    write_outputs(&args.out, &file, &outcome, &names)?;
    Ok(summary(&file, &outcome, &names))
}

/// Macro file, generation log and evaluation list; shared with `experiment`.
pub fn write_outputs(out: &Path, file: &MacroFile, outcome: &GaOutcome, names: &[String]) -> CliResult<()> {
    write_file(out, MACRO_FILE, file.to_json()?)?;
    write_with(out, GENERATIONS_FILE, |buf| Ok(outcome.log.write_csv(buf, names)?))?;
    write_with(out, EVALUATIONS_FILE, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let io = |e: csv::Error| crate::error::CliError::Runtime(e.to_string());
        w.write_record(["insertion_index", "generation", "fitness", "macro"])
            .map_err(io)?;
        for r in &outcome.evaluated {
            w.write_record([
                r.insertion_index.to_string(),
                r.generation_born.to_string(),
                r.fitness.to_string(),
                r.macro_action.display_names(names),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Generation, average retained fitness with its change, and best macro.
pub fn generation_table(log: &GenerationLog, names: &[String]) -> Table {
    let mut t = Table::new(["generation", "avg fitness (improvement)", "best macro"]);
    for e in &log.entries {
        let avg = match e.improvement_pct {
            Some(p) => format!("{:.4} ({p:+.2}%)", e.avg_fitness),
            None => format!("{:.4}", e.avg_fitness),
        };
        t.push([e.generation.to_string(), avg, e.best.macro_action.display_names(names)]);
    }
    t
}

fn summary(file: &MacroFile, outcome: &GaOutcome, names: &[String]) -> String {
    format!(
        "{}\nbest macro: {} (fitness {:.4}, {} evaluations)\n",
        generation_table(&outcome.log, names).render(),
        file.macro_action.join(","),
        file.fitness,
        outcome.evaluated.len()
    )
}
