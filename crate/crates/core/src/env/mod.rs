//! Episodic environments with discrete actions.
//!
//! Tabular environments (chain, DeepSea, the grid worlds) also expose their
//! exact one-step model through [`TabularModel`], which the coverage checker
//! and the model/simulator agreement tests rely on.

mod cartpole;
mod chain;
mod deep_sea;
mod grid;
mod mountain_car;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng64;

pub use cartpole::{CartPole, CartPoleParams};
pub use chain::Chain;
pub use deep_sea::{DeepSea, DeepSeaCost};
pub use grid::{GridAction, GridWorld, WallRule, GRID_ACTIONS};
pub use mountain_car::MountainCar;

#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Discrete(usize),
    Vector(Vec<f64>),
}

impl Observation {
    pub fn discrete(&self) -> Result<usize> {
        match self {
            Observation::Discrete(s) => Ok(*s),
            Observation::Vector(_) => Err(Error::ObservationKind("expected a discrete state")),
        }
    }

    pub fn vector(&self) -> Result<&[f64]> {
        match self {
            Observation::Vector(v) => Ok(v),
            Observation::Discrete(_) => Err(Error::ObservationKind("expected a vector observation")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    /// The episode ended only because the step limit was hit.
    pub truncated: bool,
    /// The environment's success event happened on this step.
    pub goal: bool,
}

impl StepResult {
    /// Whether the transition ends in a true terminal state (no bootstrapping).
    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservationSpace {
    Discrete { states: usize },
    Box { low: Vec<f64>, high: Vec<f64> },
}

/// A two-dimensional view of the state space used by first-visit maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub axes: [&'static str; 2],
    pub bounds: [(f64, f64); 2],
}

pub trait Environment: Send {
    fn name(&self) -> &'static str;

    fn num_actions(&self) -> usize;

    fn observation_space(&self) -> ObservationSpace;

    fn max_episode_steps(&self) -> usize;

    fn reset(&mut self, rng: &mut Rng64) -> Observation;

    fn step(&mut self, action: usize) -> Result<StepResult>;

    fn tabular(&self) -> Option<&dyn TabularModel> {
        None
    }

    /// Continuous environments project an observation onto two axes.
    fn projection(&self) -> Option<Projection> {
        None
    }

    fn project(&self, _observation: &Observation) -> Option<[f64; 2]> {
        None
    }
}

/// One outcome of the exact single-step model.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub probability: f64,
    pub reward: f64,
    pub done: bool,
}

pub trait TabularModel {
    /// Size of a value table, including any terminal bookkeeping rows.
    fn num_states(&self) -> usize;

    fn num_actions(&self) -> usize;

    /// Every state of the layout in a fixed order.
    fn states(&self) -> Vec<usize>;

    /// Absorbing states where no action is ever taken.
    fn is_terminal(&self, _state: usize) -> bool {
        false
    }

    /// States at which the agent acts.
    fn decision_states(&self) -> Vec<usize> {
        self.states().into_iter().filter(|&s| !self.is_terminal(s)).collect()
    }

    fn start_state(&self) -> usize;

    fn transitions(&self, state: usize, action: usize) -> Result<Vec<Transition>>;

    /// Row/column of a state on the layout grid, `None` for bookkeeping states.
    fn cell(&self, state: usize) -> Option<(usize, usize)>;

    /// `(rows, cols)` of the layout grid.
    fn layout(&self) -> (usize, usize);
}

/// Step counter shared by all environments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct EpisodeClock {
    pub limit: usize,
    pub t: usize,
    pub started: bool,
    pub finished: bool,
}

impl EpisodeClock {
    pub fn new(limit: usize) -> Self {
        Self { limit, t: 0, started: false, finished: false }
    }

    pub fn reset(&mut self) {
        self.t = 0;
        self.started = true;
        self.finished = false;
    }

    pub fn check(&self, action: usize, num_actions: usize) -> Result<()> {
        if !self.started {
            return Err(Error::NotReset);
        }
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        if action >= num_actions {
            return Err(Error::ActionOutOfRange { action, num_actions });
        }
        Ok(())
    }

    /// Advances time and returns `(done, truncated)` given the natural termination flag.
    pub fn tick(&mut self, terminal: bool) -> (bool, bool) {
        self.t += 1;
        let truncated = !terminal && self.t >= self.limit;
        let done = terminal || truncated;
        self.finished = done;
        (done, truncated)
    }
}

fn default_true() -> bool {
    true
}

/// Environment family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvKind {
    Chain {
        num_blocks: usize,
    },
    DeepSea {
        size: usize,
        #[serde(default)]
        randomized: bool,
        #[serde(default)]
        cost: DeepSeaCost,
    },
    GridWorld {
        width: usize,
        height: usize,
        /// `[row, col]`; defaults to one cell in from the bottom-left corner.
        #[serde(default)]
        goal: Option<[usize; 2]>,
    },
    OpenGrid {
        width: usize,
        height: usize,
        #[serde(default = "default_true")]
        terminate_on_wall: bool,
        /// With `terminate_on_wall`, only the bottom wall ends the episode.
        #[serde(default)]
        bottom_wall_only: bool,
    },
    MountainCarSparse,
    CartpoleSwingupSparse {
        /// Disable the reset jitter (deterministic hanging start).
        #[serde(default)]
        zero_jitter: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    #[serde(flatten)]
    pub kind: EnvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_episode_steps: Option<usize>,
}

impl EnvSpec {
    pub fn new(kind: EnvKind) -> Self {
        Self { kind, max_episode_steps: None }
    }

    pub fn with_max_steps(mut self, steps: usize) -> Self {
        self.max_episode_steps = Some(steps);
        self
    }

    pub fn chain(num_blocks: usize) -> Self {
        Self::new(EnvKind::Chain { num_blocks })
    }

    pub fn deep_sea(size: usize) -> Self {
        Self::new(EnvKind::DeepSea { size, randomized: false, cost: DeepSeaCost::default() })
    }

    pub fn deep_sea_randomized(size: usize) -> Self {
        Self::new(EnvKind::DeepSea { size, randomized: true, cost: DeepSeaCost::default() })
    }

    pub fn grid_world(width: usize, height: usize) -> Self {
        Self::new(EnvKind::GridWorld { width, height, goal: None })
    }

    pub fn open_grid(width: usize, height: usize) -> Self {
        Self::new(EnvKind::OpenGrid { width, height, terminate_on_wall: true, bottom_wall_only: false })
    }

    pub fn mountain_car() -> Self {
        Self::new(EnvKind::MountainCarSparse)
    }

    pub fn cartpole() -> Self {
        Self::new(EnvKind::CartpoleSwingupSparse { zero_jitter: false })
    }

    pub fn num_actions(&self) -> usize {
        match self.kind {
            EnvKind::Chain { .. } | EnvKind::DeepSea { .. } => 2,
            EnvKind::GridWorld { .. } | EnvKind::OpenGrid { .. } => 4,
            EnvKind::MountainCarSparse | EnvKind::CartpoleSwingupSparse { .. } => 3,
        }
    }

    pub fn is_tabular(&self) -> bool {
        !matches!(self.kind, EnvKind::MountainCarSparse | EnvKind::CartpoleSwingupSparse { .. })
    }

    pub fn default_max_steps(&self) -> usize {
        match &self.kind {
            EnvKind::Chain { num_blocks } => Chain::length_for(*num_blocks).max(1),
            EnvKind::DeepSea { size, .. } => *size,
            EnvKind::GridWorld { .. } => 1000,
            EnvKind::OpenGrid { .. } => 5000,
            EnvKind::MountainCarSparse => 5000,
            EnvKind::CartpoleSwingupSparse { .. } => 1000,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            EnvKind::Chain { .. } => "chain",
            EnvKind::DeepSea { .. } => "deep_sea",
            EnvKind::GridWorld { .. } => "grid_world",
            EnvKind::OpenGrid { .. } => "open_grid",
            EnvKind::MountainCarSparse => "mountain_car_sparse",
            EnvKind::CartpoleSwingupSparse { .. } => "cartpole_swingup_sparse",
        }
    }

    /// Instantiates the environment. The rng is used only by environments
    /// with per-run randomness (randomized DeepSea).
    pub fn build(&self, rng: &mut Rng64) -> Result<Box<dyn Environment>> {
        let limit = self.max_episode_steps.unwrap_or_else(|| self.default_max_steps());
        if limit == 0 {
            return Err(crate::error::invalid("max_episode_steps must be positive"));
        }
        Ok(match &self.kind {
            EnvKind::Chain { num_blocks } => Box::new(Chain::new(*num_blocks, limit)?),
            EnvKind::DeepSea { size, randomized, cost } => {
                if *randomized {
                    Box::new(DeepSea::randomized(*size, *cost, limit, rng)?)
                } else {
                    Box::new(DeepSea::new(*size, *cost, limit)?)
                }
            }
            EnvKind::GridWorld { width, height, goal } => {
                Box::new(GridWorld::room(*width, *height, goal.map(|g| (g[0], g[1])), limit)?)
            }
            EnvKind::OpenGrid { width, height, terminate_on_wall, bottom_wall_only } => {
                let walls = match (terminate_on_wall, bottom_wall_only) {
                    (false, _) => WallRule::Block,
                    (true, false) => WallRule::Any,
                    (true, true) => WallRule::Bottom,
                };
                Box::new(GridWorld::open(*width, *height, walls, limit)?)
            }
            EnvKind::MountainCarSparse => Box::new(MountainCar::new(limit)),
            EnvKind::CartpoleSwingupSparse { zero_jitter } => {
                Box::new(CartPole::new(CartPoleParams::default(), !*zero_jitter, limit))
            }
        })
    }
}

/// Decision states of a tabular environment.
pub fn enumerate_states(env: &dyn Environment) -> Result<Vec<usize>> {
    env.tabular().map(|m| m.states()).ok_or_else(|| Error::NotTabular(env.name().to_string()))
}

pub fn transition_model(env: &dyn Environment, state: usize, action: usize) -> Result<Vec<Transition>> {
    env.tabular()
        .ok_or_else(|| Error::NotTabular(env.name().to_string()))?
        .transitions(state, action)
}

/// Tab-separated dump of the full model: `state action next_state prob reward done`.
pub fn dump_transition_model<W: Write>(model: &dyn TabularModel, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "state\taction\tnext_state\tprob\treward\tdone")?;
    for s in model.states() {
        for a in 0..model.num_actions() {
            let outcomes = model
                .transitions(s, a)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
            for t in outcomes {
                writeln!(out, "{s}\t{a}\t{}\t{}\t{}\t{}", t.next_state, t.probability, t.reward, t.done)?;
            }
        }
    }
    Ok(())
}
