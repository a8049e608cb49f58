use super::{EpisodeClock, Environment, Observation, ObservationSpace, StepResult, TabularModel, Transition};
use crate::error::{invalid, Error, Result};
use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

pub const GRID_ACTIONS: [GridAction; 4] = [GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right];

/// Which walls end an open-grid episode on contact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallRule {
    /// Walls block movement and nothing terminates.
    Block,
    Any,
    /// Only moving down out of the bottom row terminates; other walls block.
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Walls block; the goal cell pays 1 and ends the episode.
    Room { goal: (usize, usize) },
    /// No reward; walls optionally end the episode.
    Open { walls: WallRule },
}

/// Four-action grid. The start cell is the top-centre cell one row below the
/// top wall. States are numbered `row * width + col`.
#[derive(Clone, Debug)]
pub struct GridWorld {
    width: usize,
    height: usize,
    mode: Mode,
    pos: (usize, usize),
    clock: EpisodeClock,
}

impl GridWorld {
    /// Single room with one rewarding goal; the default goal sits one cell in
    /// from the bottom-left corner, away from the start's row and column.
    pub fn room(width: usize, height: usize, goal: Option<(usize, usize)>, max_episode_steps: usize) -> Result<Self> {
        Self::check_size(width, height)?;
        let goal = goal.unwrap_or((height - 2, 1.min(width - 1)));
        if goal.0 >= height || goal.1 >= width {
            return Err(invalid(format!("goal {goal:?} outside a {height}x{width} grid")));
        }
        let start = Self::start_for(width);
        if goal == start {
            return Err(invalid("goal coincides with the start cell"));
        }
        Ok(Self { width, height, mode: Mode::Room { goal }, pos: start, clock: EpisodeClock::new(max_episode_steps) })
    }

    pub fn open(width: usize, height: usize, walls: WallRule, max_episode_steps: usize) -> Result<Self> {
        Self::check_size(width, height)?;
        Ok(Self {
            width,
            height,
            mode: Mode::Open { walls },
            pos: Self::start_for(width),
            clock: EpisodeClock::new(max_episode_steps),
        })
    }

    fn check_size(width: usize, height: usize) -> Result<()> {
        if width < 1 || height < 2 {
            return Err(invalid(format!("grid must be at least 2 rows by 1 column, got {height}x{width}")));
        }
        Ok(())
    }

    fn start_for(width: usize) -> (usize, usize) {
        (1, width / 2)
    }

    pub fn start(&self) -> (usize, usize) {
        Self::start_for(self.width)
    }

    pub fn goal(&self) -> Option<(usize, usize)> {
        match self.mode {
            Mode::Room { goal } => Some(goal),
            Mode::Open { .. } => None,
        }
    }

    pub fn id(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// `(next cell, hit a wall)`.
    fn moved(&self, (r, c): (usize, usize), action: usize) -> ((usize, usize), bool) {
        match action {
            0 if r > 0 => ((r - 1, c), false),
            1 if r + 1 < self.height => ((r + 1, c), false),
            2 if c > 0 => ((r, c - 1), false),
            3 if c + 1 < self.width => ((r, c + 1), false),
            _ => ((r, c), true),
        }
    }

    /// `(next cell, reward, terminal, goal)`.
    fn outcome(&self, pos: (usize, usize), action: usize) -> ((usize, usize), f64, bool, bool) {
        let (next, wall) = self.moved(pos, action);
        match self.mode {
            Mode::Room { goal } if next == goal => (next, 1.0, true, true),
            Mode::Room { .. } => (next, 0.0, false, false),
            Mode::Open { walls } => {
                let terminal = wall
                    && match walls {
                        WallRule::Block => false,
                        WallRule::Any => true,
                        WallRule::Bottom => action == GridAction::Down as usize,
                    };
                (next, 0.0, terminal, false)
            }
        }
    }
}

impl Environment for GridWorld {
    fn name(&self) -> &'static str {
        match self.mode {
            Mode::Room { .. } => "grid_world",
            Mode::Open { .. } => "open_grid",
        }
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Discrete { states: self.width * self.height }
    }

    fn max_episode_steps(&self) -> usize {
        self.clock.limit
    }

    fn reset(&mut self, _rng: &mut Rng64) -> Observation {
        self.pos = self.start();
        self.clock.reset();
        Observation::Discrete(self.id(self.pos.0, self.pos.1))
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, 4)?;
        let (next, reward, terminal, goal) = self.outcome(self.pos, action);
        self.pos = next;
        let (done, truncated) = self.clock.tick(terminal);
        Ok(StepResult { observation: Observation::Discrete(self.id(next.0, next.1)), reward, done, truncated, goal })
    }

    fn tabular(&self) -> Option<&dyn TabularModel> {
        Some(self)
    }
}

impl TabularModel for GridWorld {
    fn num_states(&self) -> usize {
        self.width * self.height
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn states(&self) -> Vec<usize> {
        (0..self.width * self.height).collect()
    }

    fn is_terminal(&self, state: usize) -> bool {
        self.goal().is_some_and(|(r, c)| self.id(r, c) == state)
    }

    fn start_state(&self) -> usize {
        let (r, c) = self.start();
        self.id(r, c)
    }

    fn transitions(&self, state: usize, action: usize) -> Result<Vec<Transition>> {
        let n = self.width * self.height;
        if state >= n {
            return Err(Error::StateOutOfRange { state, num_states: n });
        }
        if action >= 4 {
            return Err(Error::ActionOutOfRange { action, num_actions: 4 });
        }
        let pos = (state / self.width, state % self.width);
        let (next, reward, done, _) = self.outcome(pos, action);
        Ok(vec![Transition { next_state: self.id(next.0, next.1), probability: 1.0, reward, done }])
    }

    fn cell(&self, state: usize) -> Option<(usize, usize)> {
        (state < self.width * self.height).then(|| (state / self.width, state % self.width))
    }

    fn layout(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn start_is_top_center_offset_one_row() {
        let mut g = GridWorld::room(23, 23, None, 1000).unwrap();
        let s = g.reset(&mut stream(0, 0)).discrete().unwrap();
        assert_eq!(g.cell(s), Some((1, 11)));
        assert_eq!(g.states().len(), 529);
    }

    #[test]
    fn default_goal_avoids_start_row_col_and_walls() {
        let g = GridWorld::room(23, 23, None, 1000).unwrap();
        let (gr, gc) = g.goal().unwrap();
        assert_eq!((gr, gc), (21, 1));
        assert_ne!(gr, 1);
        assert_ne!(gc, 11);
        assert!(gr > 0 && gr < 22 && gc > 0 && gc < 22);
    }

    #[test]
    fn walls_block_in_room() {
        let g = GridWorld::room(5, 5, None, 100).unwrap();
        let t = g.transitions(g.id(0, 0), GridAction::Up as usize).unwrap();
        assert_eq!(t, vec![Transition { next_state: 0, probability: 1.0, reward: 0.0, done: false }]);
        let t = g.transitions(g.id(2, 2), GridAction::Right as usize).unwrap();
        assert_eq!(t[0].next_state, g.id(2, 3));
    }

    #[test]
    fn open_grid_wall_ends_episode() {
        let g = GridWorld::open(5, 5, WallRule::Any, 100).unwrap();
        let t = g.transitions(g.id(0, 3), GridAction::Up as usize).unwrap();
        assert!(t[0].done);
        let g = GridWorld::open(5, 5, WallRule::Block, 100).unwrap();
        assert!(!g.transitions(g.id(0, 3), GridAction::Up as usize).unwrap()[0].done);
    }

    #[test]
    fn reaching_goal_pays_and_terminates() {
        let mut g = GridWorld::room(5, 5, Some((2, 2)), 100).unwrap();
        g.reset(&mut stream(0, 0));
        let r = g.step(GridAction::Down as usize).unwrap();
        assert_eq!(r.reward, 1.0);
        assert!(r.done && r.goal && r.terminal());
        assert!(g.is_terminal(g.id(2, 2)));
        assert_eq!(g.decision_states().len(), 24);
    }

    #[test]
    fn step_limit_truncates() {
        let mut g = GridWorld::room(5, 5, None, 3).unwrap();
        g.reset(&mut stream(0, 0));
        g.step(0).unwrap();
        g.step(0).unwrap();
        let r = g.step(0).unwrap();
        assert!(r.done && r.truncated && !r.terminal());
    }
}
