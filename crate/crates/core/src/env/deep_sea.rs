use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EpisodeClock, Environment, Observation, ObservationSpace, StepResult, TabularModel, Transition};
use crate::error::{invalid, Error, Result};
use crate::rng::Rng64;

/// Which transitions pay the `0.01 / N` movement cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeepSeaCost {
    /// Every step pays.
    EveryStep,
    /// Only down-right moves pay, as in bsuite.
    #[default]
    RightOnly,
}

/// Lower triangle of an `N × N` grid. Each step moves one row down, either
/// straight or diagonally to the right; the episode ends after exactly `N`
/// steps. Moving down-right out of the bottom-right cell pays `1.0`.
///
/// States are numbered row by row, `id(r, c) = r(r+1)/2 + c`, with one extra
/// absorbing id for the terminal row.
#[derive(Clone, Debug)]
pub struct DeepSea {
    size: usize,
    cost: DeepSeaCost,
    /// Per state: which action index moves down-right.
    right_action: Vec<u8>,
    row: usize,
    col: usize,
    clock: EpisodeClock,
}

impl DeepSea {
    pub const DOWN: usize = 0;
    pub const DOWN_RIGHT: usize = 1;

    pub fn new(size: usize, cost: DeepSeaCost, max_episode_steps: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("deep sea size must be positive"));
        }
        let cells = size * (size + 1) / 2;
        Ok(Self {
            size,
            cost,
            right_action: vec![Self::DOWN_RIGHT as u8; cells],
            row: 0,
            col: 0,
            clock: EpisodeClock::new(max_episode_steps),
        })
    }

    /// Action effects permuted independently per state, fixed for the lifetime
    /// of the instance.
    pub fn randomized(size: usize, cost: DeepSeaCost, max_episode_steps: usize, rng: &mut Rng64) -> Result<Self> {
        let mut env = Self::new(size, cost, max_episode_steps)?;
        for a in env.right_action.iter_mut() {
            *a = rng.random_range(0..2u8);
        }
        Ok(env)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn terminal_state(&self) -> usize {
        self.size * (self.size + 1) / 2
    }

    pub fn state_id(row: usize, col: usize) -> usize {
        row * (row + 1) / 2 + col
    }

    pub fn coords(&self, state: usize) -> Option<(usize, usize)> {
        if state >= self.terminal_state() {
            return None;
        }
        // Largest r with r(r+1)/2 <= state.
        let mut r = (((8 * state + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        while (r + 1) * (r + 2) / 2 <= state {
            r += 1;
        }
        while r * (r + 1) / 2 > state {
            r -= 1;
        }
        Some((r, state - r * (r + 1) / 2))
    }

    /// The action index that moves down-right at a state.
    pub fn right_action_at(&self, state: usize) -> usize {
        self.right_action[state] as usize
    }

    fn outcome(&self, row: usize, col: usize, action: usize) -> (usize, usize, f64, bool, bool) {
        let right = action == self.right_action[Self::state_id(row, col)] as usize;
        let step_cost = 0.01 / self.size as f64;
        let mut reward = match (self.cost, right) {
            (DeepSeaCost::EveryStep, _) | (DeepSeaCost::RightOnly, true) => -step_cost,
            (DeepSeaCost::RightOnly, false) => 0.0,
        };
        let goal = right && col == self.size - 1;
        if goal {
            reward += 1.0;
        }
        let next_row = row + 1;
        let next_col = if right { (col + 1).min(self.size - 1) } else { col };
        (next_row, next_col, reward, next_row == self.size, goal)
    }

    fn id_after(&self, row: usize, col: usize) -> usize {
        if row >= self.size {
            self.terminal_state()
        } else {
            Self::state_id(row, col)
        }
    }
}

impl Environment for DeepSea {
    fn name(&self) -> &'static str {
        "deep_sea"
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Discrete { states: self.terminal_state() + 1 }
    }

    fn max_episode_steps(&self) -> usize {
        self.clock.limit
    }

    fn reset(&mut self, _rng: &mut Rng64) -> Observation {
        self.row = 0;
        self.col = 0;
        self.clock.reset();
        Observation::Discrete(0)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, 2)?;
        let (row, col, reward, terminal, goal) = self.outcome(self.row, self.col, action);
        self.row = row;
        self.col = col;
        let (done, truncated) = self.clock.tick(terminal);
        Ok(StepResult { observation: Observation::Discrete(self.id_after(row, col)), reward, done, truncated, goal })
    }

    fn tabular(&self) -> Option<&dyn TabularModel> {
        Some(self)
    }
}

impl TabularModel for DeepSea {
    fn num_states(&self) -> usize {
        self.terminal_state() + 1
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn states(&self) -> Vec<usize> {
        (0..self.terminal_state()).collect()
    }

    fn start_state(&self) -> usize {
        0
    }

    fn transitions(&self, state: usize, action: usize) -> Result<Vec<Transition>> {
        let (row, col) =
            self.coords(state).ok_or(Error::StateOutOfRange { state, num_states: self.terminal_state() })?;
        if action >= 2 {
            return Err(Error::ActionOutOfRange { action, num_actions: 2 });
        }
        let (r, c, reward, done, _) = self.outcome(row, col, action);
        Ok(vec![Transition { next_state: self.id_after(r, c), probability: 1.0, reward, done }])
    }

    fn cell(&self, state: usize) -> Option<(usize, usize)> {
        self.coords(state)
    }

    fn layout(&self) -> (usize, usize) {
        (self.size, self.size)
    }
}
