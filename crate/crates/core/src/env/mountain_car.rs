use super::{EpisodeClock, Environment, Observation, ObservationSpace, Projection, StepResult};
use crate::error::Result;
use crate::rng::Rng64;

pub const POSITION_BOUNDS: (f64, f64) = (-1.2, 0.6);
pub const VELOCITY_BOUNDS: (f64, f64) = (-0.07, 0.07);
pub const GOAL_POSITION: f64 = 0.5;
pub const START: [f64; 2] = [-0.5, 0.0];

/// Sparse-reward mountain car: reward 1 on reaching the goal, zero otherwise.
/// Actions push left, coast, push right.
#[derive(Clone, Debug)]
pub struct MountainCar {
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
}

impl MountainCar {
    pub fn new(max_episode_steps: usize) -> Self {
        Self { position: START[0], velocity: START[1], clock: EpisodeClock::new(max_episode_steps) }
    }

    pub fn state(&self) -> [f64; 2] {
        [self.position, self.velocity]
    }

    /// One application of the classic update rule.
    pub fn dynamics(position: f64, velocity: f64, action: usize) -> (f64, f64) {
        let force = action as f64 - 1.0;
        let v = (velocity + 0.001 * force - 0.0025 * (3.0 * position).cos()).clamp(VELOCITY_BOUNDS.0, VELOCITY_BOUNDS.1);
        let p = (position + v).clamp(POSITION_BOUNDS.0, POSITION_BOUNDS.1);
        let v = if p <= POSITION_BOUNDS.0 && v < 0.0 { 0.0 } else { v };
        (p, v)
    }
}

impl Environment for MountainCar {
    fn name(&self) -> &'static str {
        "mountain_car_sparse"
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Box {
            low: vec![POSITION_BOUNDS.0, VELOCITY_BOUNDS.0],
            high: vec![POSITION_BOUNDS.1, VELOCITY_BOUNDS.1],
        }
    }

    fn max_episode_steps(&self) -> usize {
        self.clock.limit
    }

    fn reset(&mut self, _rng: &mut Rng64) -> Observation {
        self.position = START[0];
        self.velocity = START[1];
        self.clock.reset();
        Observation::Vector(vec![self.position, self.velocity])
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, 3)?;
        let (p, v) = Self::dynamics(self.position, self.velocity, action);
        self.position = p;
        self.velocity = v;
        let goal = p >= GOAL_POSITION;
        let (done, truncated) = self.clock.tick(goal);
        Ok(StepResult {
            observation: Observation::Vector(vec![p, v]),
            reward: if goal { 1.0 } else { 0.0 },
            done,
            truncated,
            goal,
        })
    }

    fn projection(&self) -> Option<Projection> {
        Some(Projection { axes: ["position", "velocity"], bounds: [POSITION_BOUNDS, VELOCITY_BOUNDS] })
    }

    fn project(&self, observation: &Observation) -> Option<[f64; 2]> {
        let v = observation.vector().ok()?;
        Some([v[0], v[1]])
    }
}
