use rand::Rng;

use super::{EpisodeLog, StepEvent};
use crate::env::Environment;
use crate::error::{invalid, Result};
use crate::explore::{argmax_random_tie, ActionSelector};
use crate::fa::TabularQ;
use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QLearningConfig {
    pub alpha: f64,
    pub gamma: f64,
    #[serde(default)]
    pub initial_value: f64,
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid(format!("gamma must lie in [0,1], got {}", self.gamma)));
        }
        if !self.initial_value.is_finite() {
            return Err(invalid("initial value must be finite"));
        }
        Ok(())
    }
}

/// `Q(x,a) += α (r + γ max_a' Q(x',a') − Q(x,a))`, without the bootstrap term
/// when `terminal`.
pub fn q_learning_update(
    q: &mut TabularQ,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    terminal: bool,
    cfg: &QLearningConfig,
) -> Result<f64> {
    let current = q.get(state, action)?;
    let bootstrap = if terminal { 0.0 } else { cfg.gamma * q.max(next_state)? };
    let td = reward + bootstrap - current;
    q.set(state, action, current + cfg.alpha * td)?;
    Ok(td)
}

/// Runs one episode of on-line Q-learning. The selector sees the current
/// table row on every step, so value changes take effect immediately.
pub fn q_learning_episode(
    env: &mut dyn Environment,
    env_rng: &mut Rng64,
    q: &mut TabularQ,
    selector: &mut dyn ActionSelector,
    cfg: &QLearningConfig,
    episode: usize,
    hook: &mut dyn FnMut(&StepEvent, &mut TabularQ),
) -> Result<EpisodeLog> {
    let mut log = EpisodeLog::new(episode);
    let mut state = env.reset(env_rng).discrete()?;
    let mut discount = 1.0;
    loop {
        let action = selector.select(q.row(state)?)?;
        let step = env.step(action)?;
        let next = step.observation.discrete()?;
        let td = q_learning_update(q, state, action, step.reward, next, step.terminal(), cfg)?;
        log.record(step.reward, discount, step.goal);
        discount *= cfg.gamma;
        let event = StepEvent {
            step: log.steps - 1,
            action,
            reward: step.reward,
            done: step.done,
            target_action: None,
            td_error: td,
        };
        hook(&event, q);
        if step.done {
            selector.episode_end();
            return Ok(log);
        }
        state = next;
    }
}

/// Greedy rollout (ties broken at random) without learning; returns the
/// episode summary under discount `gamma`.
pub fn greedy_rollout(
    env: &mut dyn Environment,
    env_rng: &mut Rng64,
    q: &TabularQ,
    gamma: f64,
    tie_rng: &mut impl Rng,
) -> Result<EpisodeLog> {
    let mut log = EpisodeLog::new(0);
    let mut state = env.reset(env_rng).discrete()?;
    let mut discount = 1.0;
    loop {
        let action = argmax_random_tie(q.row(state)?, tie_rng)?;
        let step = env.step(action)?;
        log.record(step.reward, discount, step.goal);
        discount *= gamma;
        if step.done {
            return Ok(log);
        }
        state = step.observation.discrete()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, gamma: f64) -> QLearningConfig {
        QLearningConfig { alpha, gamma, initial_value: 0.0 }
    }

    #[test]
    fn terminal_update_takes_reward() {
        let mut q = TabularQ::new(2, 2, 0.0);
        q_learning_update(&mut q, 0, 1, 1.0, 1, true, &cfg(1.0, 0.99)).unwrap();
        assert_eq!(q.get(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn bootstrap_uses_max_next_value() {
        let mut q = TabularQ::new(2, 2, 0.0);
        q.set(1, 0, 1.0).unwrap();
        q.set(1, 1, -3.0).unwrap();
        q_learning_update(&mut q, 0, 0, 0.0, 1, false, &cfg(1.0, 0.99)).unwrap();
        assert!((q.get(0, 0).unwrap() - 0.99).abs() < 1e-15);
    }

    #[test]
    fn partial_step_size() {
        let mut q = TabularQ::new(1, 1, 2.0);
        let td = q_learning_update(&mut q, 0, 0, 1.0, 0, true, &cfg(0.25, 0.5)).unwrap();
        assert_eq!(td, -1.0);
        assert_eq!(q.get(0, 0).unwrap(), 1.75);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 0.9).validate().is_err());
        assert!(cfg(0.1, 1.1).validate().is_err());
        assert!(cfg(0.1, 1.0).validate().is_ok());
    }
}
