use std::f64::consts::PI;

use rand_distr::{Distribution, Normal};

use super::{EpisodeClock, Environment, Observation, ObservationSpace, Projection, StepResult};
use crate::error::Result;
use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartPoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub half_length: f64,
    pub gravity: f64,
    pub force: f64,
    pub dt: f64,
    pub substeps: usize,
    pub rail: f64,
    pub jitter: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            gravity: 9.8,
            force: 10.0,
            dt: 0.01,
            substeps: 2,
            rail: 2.4,
            jitter: 0.01,
        }
    }
}

/// Cart-pole swing-up with sparse reward: 1 while `cos θ > 0.995` and
/// `|x| < 0.25`, otherwise 0. The pole starts hanging down (`θ = π`, with
/// `θ = 0` upright) and episodes end only at the step limit.
///
/// Observation: `(x, cos θ, sin θ, ẋ, θ̇)`.
#[derive(Clone, Debug)]
pub struct CartPole {
    params: CartPoleParams,
    jitter: bool,
    /// `(x, ẋ, θ, θ̇)`.
    state: [f64; 4],
    clock: EpisodeClock,
}

pub const X_BOUND: f64 = 2.4;
pub const SPEED_BOUND: f64 = 10.0;

fn wrap_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI {
        PI
    } else {
        t
    }
}

impl CartPole {
    pub fn new(params: CartPoleParams, jitter: bool, max_episode_steps: usize) -> Self {
        Self { params, jitter, state: [0.0, 0.0, PI, 0.0], clock: EpisodeClock::new(max_episode_steps) }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
    }

    pub fn observation(&self) -> Observation {
        let [x, xd, th, thd] = self.state;
        Observation::Vector(vec![x, th.cos(), th.sin(), xd, thd])
    }

    pub fn in_reward_region(&self) -> bool {
        self.state[2].cos() > 0.995 && self.state[0].abs() < 0.25
    }

    fn integrate(&mut self, force: f64) {
        let p = &self.params;
        let total = p.cart_mass + p.pole_mass;
        let pml = p.pole_mass * p.half_length;
        let h = p.dt;
        for _ in 0..p.substeps {
            let [x, xd, th, thd] = self.state;
            let (s, c) = th.sin_cos();
            let temp = (force + pml * thd * thd * s) / total;
            let thdd = (p.gravity * s - c * temp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * c * c / total));
            let xdd = temp - pml * thdd * c / total;
            let mut nx = x + h * xd;
            let mut nxd = xd + h * xdd;
            if nx.abs() >= p.rail {
                nx = nx.clamp(-p.rail, p.rail);
                nxd = 0.0;
            }
            self.state = [nx, nxd, wrap_angle(th + h * thd), thd + h * thdd];
        }
    }
}

impl Environment for CartPole {
    fn name(&self) -> &'static str {
        "cartpole_swingup_sparse"
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Box {
            low: vec![-X_BOUND, -1.0, -1.0, -SPEED_BOUND, -SPEED_BOUND],
            high: vec![X_BOUND, 1.0, 1.0, SPEED_BOUND, SPEED_BOUND],
        }
    }

    fn max_episode_steps(&self) -> usize {
        self.clock.limit
    }

    fn reset(&mut self, rng: &mut Rng64) -> Observation {
        self.state = [0.0, 0.0, PI, 0.0];
        if self.jitter {
            let noise = Normal::new(0.0, self.params.jitter).expect("finite jitter scale");
            for v in self.state.iter_mut() {
                *v += noise.sample(rng);
            }
            self.state[2] = wrap_angle(self.state[2]);
        }
        self.clock.reset();
        self.observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, 3)?;
        let force = (action as f64 - 1.0) * self.params.force;
        self.integrate(force);
        let goal = self.in_reward_region();
        let (done, truncated) = self.clock.tick(false);
        Ok(StepResult { observation: self.observation(), reward: if goal { 1.0 } else { 0.0 }, done, truncated, goal })
    }

    fn projection(&self) -> Option<Projection> {
        Some(Projection { axes: ["cart_x", "pole_angle"], bounds: [(-X_BOUND, X_BOUND), (-PI, PI)] })
    }

    fn project(&self, observation: &Observation) -> Option<[f64; 2]> {
        let v = observation.vector().ok()?;
        Some([v[0], v[2].atan2(v[1])])
    }
}
