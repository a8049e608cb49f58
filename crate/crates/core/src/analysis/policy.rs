use serde::{Deserialize, Serialize};

use crate::env::{Environment, Observation, StepResult};
use crate::error::{invalid, Error, Result};
use crate::explore::{ExplorationConfig, Explorer};
use crate::rng::Rng64;

/// The fixed greedy policy that exploration deviates from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GreedyPolicy {
    /// All actions tied, as for a freshly zeroed value table.
    #[default]
    Uniform,
    FixedAction {
        action: usize,
    },
    /// One action per state id (tabular environments only).
    PerState {
        actions: Vec<usize>,
    },
}

impl GreedyPolicy {
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        let bad = match self {
            GreedyPolicy::Uniform => None,
            GreedyPolicy::FixedAction { action } => (*action >= num_actions).then_some(*action),
            GreedyPolicy::PerState { actions } => actions.iter().copied().find(|&a| a >= num_actions),
        };
        match bad {
            Some(action) => Err(Error::ActionOutOfRange { action, num_actions }),
            None => Ok(()),
        }
    }

    fn per_state_action(actions: &[usize], state: Option<usize>) -> Result<usize> {
        let s = state.ok_or_else(|| invalid("a per-state greedy policy needs discrete observations"))?;
        actions.get(s).copied().ok_or(Error::StateOutOfRange { state: s, num_states: actions.len() })
    }

    /// Actions the greedy policy takes with positive probability.
    pub fn support(&self, state: Option<usize>, num_actions: usize) -> Result<Vec<usize>> {
        Ok(match self {
            GreedyPolicy::Uniform => (0..num_actions).collect(),
            GreedyPolicy::FixedAction { action } => vec![*action],
            GreedyPolicy::PerState { actions } => vec![Self::per_state_action(actions, state)?],
        })
    }

    /// A value row whose argmax set is the policy's support.
    pub fn q_row(&self, state: Option<usize>, num_actions: usize, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        out.resize(num_actions, 0.0);
        match self {
            GreedyPolicy::Uniform => {}
            GreedyPolicy::FixedAction { action } => out[*action] = 1.0,
            GreedyPolicy::PerState { actions } => out[Self::per_state_action(actions, state)?] = 1.0,
        }
        Ok(())
    }
}

/// An εz-greedy (or ε-greedy) explorer wrapped around a fixed greedy policy.
#[derive(Clone, Debug)]
pub struct PolicyRunner {
    explorer: Explorer,
    greedy: GreedyPolicy,
    row: Vec<f64>,
}

impl PolicyRunner {
    pub fn new(exploration: &ExplorationConfig, greedy: GreedyPolicy, rng: Rng64) -> Result<Self> {
        Ok(Self { explorer: Explorer::new(exploration, rng)?, greedy, row: Vec::new() })
    }

    pub fn explorer(&self) -> &Explorer {
        &self.explorer
    }

    pub fn select(&mut self, observation: &Observation, num_actions: usize) -> Result<usize> {
        let state = observation.discrete().ok();
        self.greedy.q_row(state, num_actions, &mut self.row)?;
        self.explorer.select(&self.row)
    }

    pub fn episode_end(&mut self) {
        self.explorer.notify_episode_end();
    }
}

/// What a rollout reports to its observer.
#[derive(Debug)]
pub enum RolloutEvent<'a> {
    /// An observation seen after `t` steps (initial and post-reset states included).
    Observe { t: u64, observation: &'a Observation },
    /// Step `t` (0-based) executed `action` from `observation`.
    Act { t: u64, observation: &'a Observation, action: usize, result: &'a StepResult },
}

/// Runs `steps` environment steps, resetting whenever an episode ends. The
/// observer returns `false` to stop early. Returns the number of steps taken.
pub fn rollout(
    env: &mut dyn Environment,
    env_rng: &mut Rng64,
    policy: &mut PolicyRunner,
    steps: u64,
    observer: &mut dyn FnMut(RolloutEvent<'_>) -> bool,
) -> Result<u64> {
    let num_actions = env.num_actions();
    let mut obs = env.reset(env_rng);
    if !observer(RolloutEvent::Observe { t: 0, observation: &obs }) {
        return Ok(0);
    }
    let mut t = 0u64;
    while t < steps {
        let action = policy.select(&obs, num_actions)?;
        let result = env.step(action)?;
        let keep = observer(RolloutEvent::Act { t, observation: &obs, action, result: &result });
        t += 1;
        let keep = keep && observer(RolloutEvent::Observe { t, observation: &result.observation });
        if !keep {
            return Ok(t);
        }
        if result.done {
            policy.episode_end();
            obs = env.reset(env_rng);
            if !observer(RolloutEvent::Observe { t, observation: &obs }) {
                return Ok(t);
            }
        } else {
            obs = result.observation;
        }
    }
    Ok(t)
}
