use super::{EpisodeClock, Environment, Observation, ObservationSpace, StepResult, TabularModel, Transition};
use crate::error::{invalid, Error, Result};
use crate::rng::Rng64;

/// Chain of deposit cells: block `k` (for `k = 1..=num_blocks`) is `k` cells
/// worth nothing followed by one cell worth `k`.
///
/// Action 0 moves right (and cashes out at the last cell); action 1 ends the
/// episode, paying the current cell's deposit.
#[derive(Clone, Debug)]
pub struct Chain {
    deposits: Vec<f64>,
    num_blocks: usize,
    position: usize,
    clock: EpisodeClock,
}

impl Chain {
    pub const ADVANCE: usize = 0;
    pub const CASH_OUT: usize = 1;

    pub fn length_for(num_blocks: usize) -> usize {
        num_blocks * (num_blocks + 3) / 2
    }

    pub fn new(num_blocks: usize, max_episode_steps: usize) -> Result<Self> {
        if num_blocks == 0 {
            return Err(invalid("chain needs at least one block"));
        }
        let mut deposits = Vec::with_capacity(Self::length_for(num_blocks));
        for k in 1..=num_blocks {
            deposits.extend(std::iter::repeat_n(0.0, k));
            deposits.push(k as f64);
        }
        Ok(Self { deposits, num_blocks, position: 0, clock: EpisodeClock::new(max_episode_steps) })
    }

    pub fn len(&self) -> usize {
        self.deposits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deposits.is_empty()
    }

    pub fn deposit(&self, position: usize) -> f64 {
        self.deposits[position]
    }

    fn outcome(&self, position: usize, action: usize) -> (usize, f64, bool) {
        let last = self.deposits.len() - 1;
        match action {
            Self::ADVANCE if position < last => (position + 1, 0.0, false),
            _ => (position, self.deposits[position], true),
        }
    }
}

impl Environment for Chain {
    fn name(&self) -> &'static str {
        "chain"
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Discrete { states: self.deposits.len() }
    }

    fn max_episode_steps(&self) -> usize {
        self.clock.limit
    }

    fn reset(&mut self, _rng: &mut Rng64) -> Observation {
        self.position = 0;
        self.clock.reset();
        Observation::Discrete(0)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, 2)?;
        let (next, reward, terminal) = self.outcome(self.position, action);
        self.position = next;
        let (done, truncated) = self.clock.tick(terminal);
        Ok(StepResult {
            observation: Observation::Discrete(next),
            reward,
            done,
            truncated,
            goal: terminal && reward >= self.num_blocks as f64,
        })
    }

    fn tabular(&self) -> Option<&dyn TabularModel> {
        Some(self)
    }
}

impl TabularModel for Chain {
    fn num_states(&self) -> usize {
        self.deposits.len()
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn states(&self) -> Vec<usize> {
        (0..self.deposits.len()).collect()
    }

    fn start_state(&self) -> usize {
        0
    }

    fn transitions(&self, state: usize, action: usize) -> Result<Vec<Transition>> {
        if state >= self.deposits.len() {
            return Err(Error::StateOutOfRange { state, num_states: self.deposits.len() });
        }
        if action >= 2 {
            return Err(Error::ActionOutOfRange { action, num_actions: 2 });
        }
        let (next_state, reward, done) = self.outcome(state, action);
        Ok(vec![Transition { next_state, probability: 1.0, reward, done }])
    }

    fn cell(&self, state: usize) -> Option<(usize, usize)> {
        (state < self.deposits.len()).then_some((0, state))
    }

    fn layout(&self) -> (usize, usize) {
        (1, self.deposits.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn deposit_pattern() {
        let c = Chain::new(3, 100).unwrap();
        assert_eq!(c.len(), 9);
        let expected = [0.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0];
        assert_eq!(c.deposits, expected);
    }

    #[test]
    fn last_cell_of_each_block_holds_k() {
        let c = Chain::new(10, 100).unwrap();
        let mut end = 0;
        for k in 1..=10 {
            end += k + 1;
            assert_eq!(c.deposit(end - 1), k as f64);
        }
        assert_eq!(end, c.len());
    }

    #[test]
    fn cash_out_at_start_pays_nothing() {
        let mut c = Chain::new(2, 100).unwrap();
        c.reset(&mut stream(0, 0));
        let r = c.step(Chain::CASH_OUT).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(r.done && !r.truncated);
        assert_eq!(c.step(0), Err(Error::EpisodeFinished));
    }

    #[test]
    fn walking_to_the_end_pays_last_deposit() {
        let mut c = Chain::new(3, 100).unwrap();
        c.reset(&mut stream(0, 0));
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let r = c.step(Chain::ADVANCE).unwrap();
            total += r.reward;
            steps += 1;
            if r.done {
                assert!(r.goal);
                break;
            }
        }
        assert_eq!(total, 3.0);
        assert_eq!(steps, 9);
    }
}
