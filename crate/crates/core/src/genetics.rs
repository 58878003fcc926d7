//! Genetic search for a single macro action.
//!
//! The search keeps a retained set of at most `q` macros. Each generation
//! evaluates `q_plus + q_star` candidates by training an agent with the
//! candidate added to its action set, keeps the top `q` of retained and
//! candidates, and breeds the next candidates: `q_plus` append-mutants and
//! `q_star` alteration-mutants of retained macros. The total number of
//! fitness evaluations is capped at `k`.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::learners::{LearnerKind, TrainConfig};
use crate::seeds::{self, Rng};
use crate::smdp::{augment_action_space, MacroAction};

/// How fitness evaluations pick their training seed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessSeeding {
    /// Evaluation `j` trains with `child_seed(master_seed, j)`.
    #[default]
    PerEvaluation,
    /// Every evaluation trains with `master_seed`, so fitness is a pure
    /// function of the macro.
    Shared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    /// Total fitness evaluations.
    pub k: usize,
    /// Retained population size.
    pub q: usize,
    /// Append mutations per generation.
    pub q_plus: usize,
    /// Alteration mutations per generation.
    pub q_star: usize,
    pub fitness_budget_steps: u64,
    pub fitness_floor: f64,
    pub master_seed: u64,
    pub seeding: FitnessSeeding,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            k: 50,
            q: 8,
            q_plus: 5,
            q_star: 3,
            fitness_budget_steps: 20_000,
            fitness_floor: -1e9,
            master_seed: 0,
            seeding: FitnessSeeding::PerEvaluation,
        }
    }
}

impl GaConfig {
    /// Candidates per generation.
    pub fn generation_size(&self) -> usize {
        self.q_plus + self.q_star
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("GA config: {m}")));
        if self.q == 0 {
            return bad("q must be at least 1".into());
        }
        if self.generation_size() == 0 {
            return bad("q_plus + q_star must be at least 1".into());
        }
        // k below the generation size is allowed: the first generation is
        // cut short and selection runs over whatever was evaluated.
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.q_plus > self.q || self.q_star > self.q {
            return bad("q_plus and q_star may not exceed q".into());
        }
        if self.fitness_budget_steps == 0 {
            return bad("fitness_budget_steps must be positive".into());
        }
        if !self.fitness_floor.is_finite() {
            return bad("fitness_floor must be finite".into());
        }
        Ok(())
    }

    /// Training seed of the `j`-th fitness evaluation.
    pub fn evaluation_seed(&self, j: usize) -> u64 {
        match self.seeding {
            FitnessSeeding::PerEvaluation => seeds::child_seed(self.master_seed, j as u64),
            FitnessSeeding::Shared => self.master_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    #[serde(rename = "macro")]
    pub macro_action: MacroAction,
    pub fitness: f64,
    pub generation_born: usize,
    /// Global evaluation counter; unique and increasing.
    pub insertion_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationEntry {
    pub generation: usize,
    /// Mean fitness of the retained set after selection.
    pub avg_fitness: f64,
    /// Relative change of `avg_fitness` against the previous generation in
    /// percent, measured against `|previous|`. Absent for generation 0.
    pub improvement_pct: Option<f64>,
    pub best: FitnessRecord,
    pub evaluations_used: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub entries: Vec<GenerationEntry>,
}

impl GenerationLog {
    /// Writes `generation,avg_fitness,improvement_pct,best_macro` rows; the
    /// macro is a comma-joined list of action names.
    pub fn write_csv<W: Write>(&self, writer: W, action_names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["generation", "avg_fitness", "improvement_pct", "best_macro"])?;
        for e in &self.entries {
            w.write_record([
                e.generation.to_string(),
                e.avg_fitness.to_string(),
                e.improvement_pct.map(|p| p.to_string()).unwrap_or_default(),
                e.best.macro_action.display_names(action_names),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: FitnessRecord,
    pub retained: Vec<FitnessRecord>,
    pub log: GenerationLog,
    /// Every evaluated candidate in evaluation order.
    pub evaluated: Vec<FitnessRecord>,
}

/// `g` random macros of length two.
pub fn init_population(num_primitives: usize, g: usize, rng: &mut Rng) -> Vec<MacroAction> {
    assert!(num_primitives > 0, "no primitives to draw from");
    (0..g)
        .map(|_| {
            let a = vec![rng.random_range(0..num_primitives), rng.random_range(0..num_primitives)];
            MacroAction::new(a).expect("length two")
        })
        .collect()
}

/// Copy of `m` with one random primitive appended.
pub fn append_op(num_primitives: usize, m: &MacroAction, rng: &mut Rng) -> MacroAction {
    let mut a = m.actions().to_vec();
    a.push(rng.random_range(0..num_primitives));
    MacroAction::new(a).expect("non-empty")
}

/// Copy of `m` with its first element replaced by a random primitive.
pub fn alter_op(num_primitives: usize, m: &MacroAction, rng: &mut Rng) -> MacroAction {
    let mut a = m.actions().to_vec();
    a[0] = rng.random_range(0..num_primitives);
    MacroAction::new(a).expect("non-empty")
}

/// The `q` best records of `retained ∪ candidates`, ordered by fitness
/// (descending) and then by age (older first).
pub fn select_top(retained: &[FitnessRecord], candidates: &[FitnessRecord], q: usize) -> Vec<FitnessRecord> {
    let mut all: Vec<FitnessRecord> = retained.iter().chain(candidates).cloned().collect();
    all.sort_by(|a, b| {
        b.fitness
            .total_cmp(&a.fitness)
            .then(a.insertion_index.cmp(&b.insertion_index))
    });
    all.truncate(q);
    all
}

/// Mean extrinsic return over the last 100 training episodes of an agent
/// whose action set is the environment's primitives plus `m`.
pub fn fitness<E: Environment + ?Sized>(
    env: &mut E,
    learner: LearnerKind,
    m: &MacroAction,
    train: &TrainConfig,
    fitness_floor: f64,
) -> Result<f64> {
    let set = augment_action_space(env.num_actions(), Some(m.clone()))?;
    let out = learner.train(env, &set, train)?;
    Ok(out.curve.tail_mean(100).unwrap_or(fitness_floor))
}

/// Runs the genetic search.
///
/// `train` supplies the learner hyper-parameters; its budget and seed are
/// replaced by `cfg.fitness_budget_steps` and the per-evaluation seed.
/// `make_env` must return a fresh environment on every call.
pub fn generate_macro<E, F>(cfg: &GaConfig, learner: LearnerKind, train: &TrainConfig, make_env: F) -> Result<GaOutcome>
where
    E: Environment,
    F: Fn() -> Result<E> + Sync,
{
    cfg.validate()?;
    let num_primitives = make_env()?.num_actions();
    let mut rng = seeds::rng(seeds::stream_seed(cfg.master_seed, "ga"));
    let mut candidates = init_population(num_primitives, cfg.generation_size(), &mut rng);
    let mut retained: Vec<FitnessRecord> = Vec::new();
    let mut evaluated: Vec<FitnessRecord> = Vec::new();
    let mut log = GenerationLog::default();
    let mut used = 0usize;
    let mut generation = 0usize;

    loop {
        let n_eval = candidates.len().min(cfg.k - used);
        let jobs: Vec<(usize, MacroAction)> = candidates
            .drain(..n_eval)
            .enumerate()
            .map(|(j, m)| (used + j, m))
            .collect();
        let fitnesses = crate::parallel::try_map(&jobs, |(j, m)| {
            let mut env = make_env()?;
            let tc = TrainConfig {
                budget_steps: cfg.fitness_budget_steps,
                seed: cfg.evaluation_seed(*j),
                ..train.clone()
            };
            fitness(&mut env, learner, m, &tc, cfg.fitness_floor)
        })?;
        let records: Vec<FitnessRecord> = jobs
            .into_iter()
            .zip(fitnesses)
            .map(|((j, m), f)| FitnessRecord {
                macro_action: m,
                fitness: f,
                generation_born: generation,
                insertion_index: j,
            })
            .collect();
        used += n_eval;
        evaluated.extend(records.iter().cloned());
        retained = select_top(&retained, &records, cfg.q);

        let avg = retained.iter().map(|r| r.fitness).sum::<f64>() / retained.len() as f64;
        let improvement_pct = log.entries.last().map(|prev| {
            if prev.avg_fitness == 0.0 {
                0.0
            } else {
                (avg - prev.avg_fitness) / prev.avg_fitness.abs() * 100.0
            }
        });
        log.entries.push(GenerationEntry {
            generation,
            avg_fitness: avg,
            improvement_pct,
            best: retained[0].clone(),
            evaluations_used: used,
        });

        if used >= cfg.k {
            break;
        }
        for idx in sample(&mut rng, retained.len(), cfg.q_plus) {
            candidates.push(append_op(num_primitives, &retained[idx].macro_action, &mut rng));
        }
        for idx in sample(&mut rng, retained.len(), cfg.q_star) {
            candidates.push(alter_op(num_primitives, &retained[idx].macro_action, &mut rng));
        }
        generation += 1;
    }

    Ok(GaOutcome {
        best: retained[0].clone(),
        retained,
        log,
        evaluated,
    })
}
