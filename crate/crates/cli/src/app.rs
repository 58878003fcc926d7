//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use macroforge::env::EnvTag;
use macroforge::experiments::EnvironmentSpec;

use crate::commands::{experiment, generate, report, solve, Source};
use crate::config::GaOverrides;
use crate::error::{CliError, CliResult};
use crate::output::resolve_out_dir;

#[derive(Debug, Parser)]
#[command(
    name = "macroforge",
    version,
    about = "Generate and evaluate macro actions for tabular RL"
)]
pub struct Cli {
    /// Worker threads for parallel training runs (default: one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a macro with the genetic algorithm.
    Generate(GenerateCmd),
    /// Run a validation, reusability or transferability experiment.
    Experiment(ExperimentCmd),
    /// Render tables, plot data and charts from report files.
    Report(ReportCmd),
    /// Solve an environment's tabular model exactly, with and without a macro.
    Solve(SolveCmd),
}

/// Flags shared by the commands that read a config file.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file.
    #[arg(long, conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Repeat a previous run from its manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory [default: $MACROFORGE_OUT/<command> or macroforge-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// GA master seed.
    #[arg(long, conflicts_with = "manifest")]
    pub seed: Option<u64>,
    /// Total fitness evaluations.
    #[arg(long, conflicts_with = "manifest")]
    pub k: Option<usize>,
    /// Retained population size.
    #[arg(long, conflicts_with = "manifest")]
    pub q: Option<usize>,
    /// Append mutations per generation.
    #[arg(long, conflicts_with = "manifest")]
    pub q_plus: Option<usize>,
    /// Alteration mutations per generation.
    #[arg(long, conflicts_with = "manifest")]
    pub q_star: Option<usize>,
}

impl ConfigArgs {
    fn overrides(&self) -> GaOverrides {
        GaOverrides {
            seed: self.seed,
            k: self.k,
            q: self.q,
            q_plus: self.q_plus,
            q_star: self.q_star,
        }
    }

    fn source(&self) -> Source {
        match &self.manifest {
            Some(p) => Source::Manifest(p.clone()),
            None => Source::Fresh,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateCmd {
    #[command(flatten)]
    pub args: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentCmd {
    #[command(flatten)]
    pub args: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    /// Report JSON files written by `experiment`.
    #[arg(conflicts_with = "manifest")]
    pub reports: Vec<PathBuf>,
    /// Also write one SVG line chart per comparison.
    #[arg(long, conflicts_with = "manifest")]
    pub svg: bool,
    /// Repeat a previous run from its manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory [default: $MACROFORGE_OUT/<command> or macroforge-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveCmd {
    /// Environment: dense, sparse, very_sparse, super_sparse or risk_corridor.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub env: Option<String>,
    /// Directory with dense_sparse.map and super_sparse.map.
    #[arg(long, conflicts_with = "manifest")]
    pub maps: Option<PathBuf>,
    /// Comma-separated action names, e.g. MOVE_FORWARD,MOVE_FORWARD.
    #[arg(long = "macro", conflicts_with = "manifest")]
    pub macro_action: Option<String>,
    #[arg(long, default_value_t = 0.99, conflicts_with = "manifest")]
    pub discount: f64,
    /// Greedy rollouts per action set.
    #[arg(long, default_value_t = 100, conflicts_with = "manifest")]
    pub episodes: usize,
    /// Repeat a previous run from its manifest.json.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory [default: $MACROFORGE_OUT/<command> or macroforge-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command; returns what to print on success.
pub fn run<I, T>(argv: I) -> Result<String, (i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { 2 } else { 0 };
        (code, e.render().to_string())
    })?;
    dispatch(cli).map_err(|e| (e.exit_code(), e.to_string()))
}

fn dispatch(cli: Cli) -> CliResult<String> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start {n} workers: {e}")))?;
    }
    match cli.command {
        Command::Generate(GenerateCmd { args }) => generate::run(&generate::GenerateArgs {
            config: args.config.clone(),
            source: args.source(),
            overrides: args.overrides(),
            out: resolve_out_dir(args.out.clone(), generate::COMMAND),
        }),
        Command::Experiment(ExperimentCmd { args }) => experiment::run(&experiment::ExperimentArgs {
            config: args.config.clone(),
            source: args.source(),
            overrides: args.overrides(),
            out: resolve_out_dir(args.out.clone(), experiment::COMMAND),
        }),
        Command::Report(cmd) => report::run(&report::ReportArgs {
            inputs: cmd.reports,
            svg: cmd.svg,
            source: cmd.manifest.map_or(Source::Fresh, Source::Manifest),
            out: resolve_out_dir(cmd.out, report::COMMAND),
        }),
        Command::Solve(cmd) => {
            let config = match &cmd.env {
                Some(env) => Some(solve::SolveConfig {
                    env: EnvTag::parse(env)?,
                    environment: EnvironmentSpec {
                        maps_dir: match &cmd.maps {
                            Some(p) => Some(
                                p.canonicalize()
                                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
                            ),
                            None => None,
                        },
                        ..EnvironmentSpec::default()
                    },
                    macro_action: cmd.macro_action.as_ref().map(|m| {
                        m.split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect()
                    }),
                    discount: cmd.discount,
                    episodes: cmd.episodes,
                }),
                None => None,
            };
            solve::run(&solve::SolveArgs {
                config,
                source: cmd.manifest.map_or(Source::Fresh, Source::Manifest),
                out: resolve_out_dir(cmd.out, solve::COMMAND),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn manifest_conflicts_with_overrides() {
        let err = run(["macroforge", "generate", "--manifest", "m.json", "--k", "3"]).unwrap_err();
        assert_eq!(err.0, 2);
    }

    #[test]
    fn missing_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let err = run(["macroforge", "generate", "--out", out.to_str().unwrap()]).unwrap_err();
        assert_eq!(err.0, 2, "{}", err.1);
        let err = run(["macroforge", "experiment", "--config", "/nonexistent.toml"]).unwrap_err();
        assert_eq!(err.0, 2, "{}", err.1);
    }
}
