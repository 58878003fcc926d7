//! Orientation-based grid maze.
//!
//! The agent stands on a floor cell facing one of eight compass directions
//! (45° apart, `0 = N` clockwise to `7 = NW`). Turning changes the facing by
//! one step, so a right-angle turn takes two primitives. `MOVE_FORWARD`
//! moves one cell along a cardinal axis: a cardinal facing moves straight, a
//! diagonal facing moves along its horizontal component when that cell is
//! open, otherwise along its vertical component, otherwise not at all.
//!
//! # Map format
//!
//! ```text
//! ; comment
//! @name dense_sparse
//! @orient E N        facing of each `S`, in reading order
//! @step_limit 500
//! @extended          marks the extended (super sparse) layout
//! #########
//! #S.....G#
//! #########
//! ```
//!
//! Grid characters are `#` wall, `.` floor, `G` goal (exactly one) and `S`
//! fixed spawn (a floor cell). The grid must be rectangular with a wall
//! border, and the goal must be reachable from every floor cell.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Environment, StepResult};
use crate::error::{Error, Result};
use crate::seeds;
use crate::smdp::Enumerable;

pub const MOVE_FORWARD: usize = 0;
pub const TURN_LEFT: usize = 1;
pub const TURN_RIGHT: usize = 2;
pub const ACTION_NAMES: [&str; 3] = ["MOVE_FORWARD", "TURN_LEFT", "TURN_RIGHT"];

pub const ORIENTATIONS: usize = 8;
const ORIENTATION_NAMES: [&str; ORIENTATIONS] = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"];

pub const DEFAULT_STEP_LIMIT: usize = 500;
pub const DEFAULT_LIVING_PENALTY: f64 = -0.0001;
pub const DEFAULT_GOAL_REWARD: f64 = 1.0;

/// `(row, col)`
pub type Cell = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tile {
    Wall,
    Floor,
    Goal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MazeSpec {
    pub name: String,
    rows: usize,
    cols: usize,
    tiles: Vec<Tile>,
    goal: Cell,
    /// Floor cells (goal included) in reading order; index = tabular id.
    floor: Vec<Cell>,
    floor_index: Vec<Option<usize>>,
    fixed_spawns: Vec<(Cell, u8)>,
    pub step_limit: usize,
    pub extended: bool,
}

pub fn parse_orientation(s: &str) -> Option<u8> {
    ORIENTATION_NAMES
        .iter()
        .position(|&n| n.eq_ignore_ascii_case(s))
        .map(|i| i as u8)
}

pub fn orientation_name(o: u8) -> &'static str {
    ORIENTATION_NAMES[o as usize % ORIENTATIONS]
}

/// Parses and validates an ASCII map.
pub fn load_map(text: &str) -> Result<MazeSpec> {
    let mut name = String::from("maze");
    let mut orients: Option<(usize, Vec<u8>)> = None;
    let mut step_limit = DEFAULT_STEP_LIMIT;
    let mut extended = false;
    let mut grid: Vec<(usize, &str)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with(';') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('@') {
            if !grid.is_empty() {
                return Err(parse_err(line_no, "directives must precede the grid"));
            }
            let mut parts = directive.split_whitespace();
            match parts.next() {
                Some("name") => name = parts.collect::<Vec<_>>().join(" "),
                Some("orient") => {
                    let list = parts
                        .map(|p| {
                            parse_orientation(p)
                                .ok_or_else(|| parse_err(line_no, &format!("unknown orientation `{p}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    orients = Some((line_no, list));
                }
                Some("step_limit") => {
                    step_limit = parts
                        .next()
                        .and_then(|v| v.parse().ok())
                        .filter(|&v: &usize| v > 0)
                        .ok_or_else(|| parse_err(line_no, "step_limit needs a positive integer"))?;
                }
                Some("extended") => extended = true,
                other => {
                    return Err(parse_err(
                        line_no,
                        &format!("unknown directive `{}`", other.unwrap_or("")),
                    ))
                }
            }
            continue;
        }
        grid.push((line_no, line));
    }

    let Some(&(first_line, first)) = grid.first() else {
        return Err(Error::MapValidation("map has no grid".into()));
    };
    let cols = first.chars().count();
    let rows = grid.len();
    let mut tiles = Vec::with_capacity(rows * cols);
    let mut goals = Vec::new();
    let mut spawn_cells = Vec::new();
    for (r, &(line_no, line)) in grid.iter().enumerate() {
        if line.chars().count() != cols {
            return Err(parse_err(
                line_no,
                &format!(
                    "row has {} columns, expected {cols} (from line {first_line})",
                    line.chars().count()
                ),
            ));
        }
        for (c, ch) in line.chars().enumerate() {
            let tile = match ch {
                '#' => Tile::Wall,
                '.' => Tile::Floor,
                'S' => {
                    spawn_cells.push((r, c));
                    Tile::Floor
                }
                'G' => {
                    goals.push((line_no, (r, c)));
                    Tile::Goal
                }
                other => return Err(parse_err(line_no, &format!("unexpected character `{other}`"))),
            };
            let border = r == 0 || c == 0 || r + 1 == rows || c + 1 == cols;
            if border && tile != Tile::Wall {
                return Err(parse_err(line_no, &format!("border cell ({r},{c}) must be a wall")));
            }
            tiles.push(tile);
        }
    }
    let goal = match goals.as_slice() {
        [(_, g)] => *g,
        [] => return Err(Error::MapValidation("map has no goal `G`".into())),
        [_, (line_no, _), ..] => return Err(parse_err(*line_no, "map has more than one goal `G`")),
    };

    let fixed_orients = match orients {
        Some((line_no, list)) => {
            if list.len() != spawn_cells.len() {
                return Err(parse_err(
                    line_no,
                    &format!("{} orientations for {} spawns", list.len(), spawn_cells.len()),
                ));
            }
            list
        }
        None => vec![0; spawn_cells.len()],
    };

    let mut floor = Vec::new();
    let mut floor_index = vec![None; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            if tiles[r * cols + c] != Tile::Wall {
                floor_index[r * cols + c] = Some(floor.len());
                floor.push((r, c));
            }
        }
    }
    if floor.len() < 2 {
        return Err(Error::MapValidation("map has no floor cell to spawn on".into()));
    }

    let spec = MazeSpec {
        name,
        rows,
        cols,
        tiles,
        goal,
        floor,
        floor_index,
        fixed_spawns: spawn_cells.into_iter().zip(fixed_orients).collect(),
        step_limit,
        extended,
    };
    let dist = spec.cell_distances_to_goal();
    if let Some(&(r, c)) = spec.floor.iter().find(|&&cell| dist[spec.idx(cell)].is_none()) {
        return Err(Error::MapValidation(format!("goal is unreachable from cell ({r},{c})")));
    }
    Ok(spec)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::MapParse {
        line,
        message: message.to_string(),
    }
}

impl MazeSpec {
    fn idx(&self, (r, c): Cell) -> usize {
        r * self.cols + c
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tile(&self, cell: Cell) -> Tile {
        self.tiles[self.idx(cell)]
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn floor_cells(&self) -> &[Cell] {
        &self.floor
    }

    /// Spawn candidates for the dense setting: every floor cell but the goal.
    pub fn dense_spawns(&self) -> impl Iterator<Item = Cell> + '_ {
        self.floor.iter().copied().filter(move |&c| c != self.goal)
    }

    pub fn fixed_spawns(&self) -> &[(Cell, u8)] {
        &self.fixed_spawns
    }

    pub fn num_states(&self) -> usize {
        self.floor.len() * ORIENTATIONS
    }

    pub fn encode(&self, cell: Cell, orientation: u8) -> usize {
        let f = self.floor_index[self.idx(cell)].expect("encode of a wall cell");
        f * ORIENTATIONS + orientation as usize
    }

    pub fn decode(&self, state: usize) -> (Cell, u8) {
        (self.floor[state / ORIENTATIONS], (state % ORIENTATIONS) as u8)
    }

    fn open(&self, r: isize, c: isize) -> Option<Cell> {
        if r < 0 || c < 0 || r as usize >= self.rows || c as usize >= self.cols {
            return None;
        }
        let cell = (r as usize, c as usize);
        (self.tile(cell) != Tile::Wall).then_some(cell)
    }

    /// Cell reached by `MOVE_FORWARD` from `cell` facing `orientation`.
    pub fn forward(&self, cell: Cell, orientation: u8) -> Cell {
        const DR: [isize; 8] = [-1, -1, 0, 1, 1, 1, 0, -1];
        const DC: [isize; 8] = [0, 1, 1, 1, 0, -1, -1, -1];
        let o = orientation as usize % ORIENTATIONS;
        let (r, c) = (cell.0 as isize, cell.1 as isize);
        let (dr, dc) = (DR[o], DC[o]);
        if dr == 0 || dc == 0 {
            return self.open(r + dr, c + dc).unwrap_or(cell);
        }
        self.open(r, c + dc).or_else(|| self.open(r + dr, c)).unwrap_or(cell)
    }

    /// Breadth-first cell distances (4-neighbourhood) to the goal.
    fn cell_distances_to_goal(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.rows * self.cols];
        let mut queue = VecDeque::from([self.goal]);
        dist[self.idx(self.goal)] = Some(0);
        while let Some((r, c)) = queue.pop_front() {
            let d = dist[self.idx((r, c))].unwrap_or(0);
            for (dr, dc) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                if let Some(n) = self.open(r as isize + dr, c as isize + dc) {
                    if dist[self.idx(n)].is_none() {
                        dist[self.idx(n)] = Some(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }
}

/// Reward sparsity setting; selects where episodes start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sparsity {
    Dense,
    Sparse,
    VerySparse,
    SuperSparse,
}

impl Sparsity {
    pub const ALL: [Sparsity; 4] = [
        Sparsity::Dense,
        Sparsity::Sparse,
        Sparsity::VerySparse,
        Sparsity::SuperSparse,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Sparsity::Dense => "dense",
            Sparsity::Sparse => "sparse",
            Sparsity::VerySparse => "very_sparse",
            Sparsity::SuperSparse => "super_sparse",
        }
    }

    pub fn needs_extended_map(self) -> bool {
        self == Sparsity::SuperSparse
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardSetting {
    pub sparsity: Sparsity,
    pub living_penalty: f64,
    pub goal_reward: f64,
}

impl RewardSetting {
    pub fn new(sparsity: Sparsity) -> Self {
        Self {
            sparsity,
            living_penalty: DEFAULT_LIVING_PENALTY,
            goal_reward: DEFAULT_GOAL_REWARD,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.living_penalty <= 0.0) || !(self.goal_reward > 0.0) {
            return Err(Error::Config(format!(
                "living_penalty must be <= 0 and goal_reward > 0 (got {} and {})",
                self.living_penalty, self.goal_reward
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentState {
    pub cell: Cell,
    pub orientation: u8,
    pub steps_elapsed: usize,
}

fn fixed_spawn(spec: &MazeSpec, sparsity: Sparsity) -> Result<(Cell, u8)> {
    let (index, want_extended) = match sparsity {
        Sparsity::Dense => unreachable!(),
        Sparsity::Sparse => (0, false),
        Sparsity::VerySparse => (1, false),
        Sparsity::SuperSparse => (0, true),
    };
    if spec.extended != want_extended {
        return Err(Error::Config(format!(
            "{} needs {} map, `{}` is {}",
            sparsity.label(),
            if want_extended {
                "the extended"
            } else {
                "a non-extended"
            },
            spec.name,
            if spec.extended { "extended" } else { "not extended" }
        )));
    }
    spec.fixed_spawns.get(index).copied().ok_or_else(|| {
        Error::Config(format!(
            "map `{}` declares no spawn #{} for {}",
            spec.name,
            index + 1,
            sparsity.label()
        ))
    })
}

/// Start state of an episode. Dense spawns uniformly over non-goal floor
/// cells with a uniform facing drawn from `seed`; the sparse settings use
/// their fixed spawn and ignore the seed.
pub fn maze_reset(spec: &MazeSpec, setting: &RewardSetting, seed: u64) -> Result<AgentState> {
    setting.validate()?;
    let (cell, orientation) = match setting.sparsity {
        Sparsity::Dense => {
            let mut rng = seeds::rng(seed);
            let n = spec.floor.len() - 1;
            let mut k = rng.random_range(0..n);
            // Skip over the goal's slot in the floor list.
            let goal_slot = spec.floor_index[spec.idx(spec.goal)].expect("goal is floor");
            if k >= goal_slot {
                k += 1;
            }
            (spec.floor[k], rng.random_range(0..ORIENTATIONS as u8))
        }
        s => fixed_spawn(spec, s)?,
    };
    Ok(AgentState {
        cell,
        orientation,
        steps_elapsed: 0,
    })
}

/// Pure transition function for one primitive.
pub fn maze_step(
    spec: &MazeSpec,
    setting: &RewardSetting,
    state: &AgentState,
    action: usize,
) -> Result<(AgentState, StepResult)> {
    let (next, mut result) = step_unlimited(spec, setting, state, action)?;
    result.truncated = !result.terminated && next.steps_elapsed >= spec.step_limit;
    Ok((next, result))
}

fn step_unlimited(
    spec: &MazeSpec,
    setting: &RewardSetting,
    state: &AgentState,
    action: usize,
) -> Result<(AgentState, StepResult)> {
    let mut next = *state;
    match action {
        MOVE_FORWARD => next.cell = spec.forward(state.cell, state.orientation),
        TURN_LEFT => next.orientation = (state.orientation + ORIENTATIONS as u8 - 1) % ORIENTATIONS as u8,
        TURN_RIGHT => next.orientation = (state.orientation + 1) % ORIENTATIONS as u8,
        _ => {
            return Err(Error::InvalidAction {
                action,
                num_actions: ACTION_NAMES.len(),
            })
        }
    }
    next.steps_elapsed += 1;
    let terminated = spec.tile(next.cell) == Tile::Goal;
    let mut reward = setting.living_penalty;
    if terminated {
        reward += setting.goal_reward;
    }
    Ok((
        next,
        StepResult {
            next_state: spec.encode(next.cell, next.orientation),
            reward,
            terminated,
            truncated: false,
        },
    ))
}

/// A live maze episode.
#[derive(Clone, Debug)]
pub struct MazeEnv {
    spec: Arc<MazeSpec>,
    setting: RewardSetting,
    state: AgentState,
    done: bool,
}

impl MazeEnv {
    pub fn new(spec: Arc<MazeSpec>, setting: RewardSetting) -> Result<Self> {
        let state = maze_reset(&spec, &setting, 0)?;
        Ok(Self {
            spec,
            setting,
            state,
            done: false,
        })
    }

    pub fn spec(&self) -> &MazeSpec {
        &self.spec
    }

    pub fn setting(&self) -> &RewardSetting {
        &self.setting
    }

    pub fn agent(&self) -> &AgentState {
        &self.state
    }
}

impl Environment for MazeEnv {
    fn num_actions(&self) -> usize {
        ACTION_NAMES.len()
    }

    fn action_names(&self) -> Vec<String> {
        ACTION_NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn num_states(&self) -> usize {
        self.spec.num_states()
    }

    fn step_limit(&self) -> usize {
        self.spec.step_limit
    }

    fn reset(&mut self, seed: u64) -> usize {
        self.state = maze_reset(&self.spec, &self.setting, seed).expect("setting validated in MazeEnv::new");
        self.done = false;
        self.state()
    }

    fn state(&self) -> usize {
        self.spec.encode(self.state.cell, self.state.orientation)
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::IllegalCall("step on a finished episode"));
        }
        let (next, result) = maze_step(&self.spec, &self.setting, &self.state, action)?;
        self.state = next;
        self.done = result.terminated || result.truncated;
        Ok(result)
    }
}

impl Enumerable for MazeEnv {
    fn tabular_states(&self) -> usize {
        self.spec.num_states()
    }

    fn tabular_actions(&self) -> usize {
        ACTION_NAMES.len()
    }

    fn is_terminal_state(&self, state: usize) -> bool {
        self.spec.decode(state).0 == self.spec.goal
    }

    fn transition(&self, state: usize, action: usize) -> Result<(usize, f64)> {
        let (cell, orientation) = self.spec.decode(state);
        let agent = AgentState {
            cell,
            orientation,
            steps_elapsed: 0,
        };
        // Step limits are not part of the stationary tabular model.
        let (_, r) = step_unlimited(&self.spec, &self.setting, &agent, action)?;
        Ok((r.next_state, r.reward))
    }
}
