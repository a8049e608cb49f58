//! ε-greedy and εz-greedy action selection.
//!
//! [`Explorer`] is the εz-greedy state machine: when no option is active it
//! either exploits (`argmax` with uniform tie-breaking) or, with probability
//! ε, draws a duration `n ~ z` and a uniform action and commits to repeating
//! that action for `n` steps in total. With `z = fixed(1)` this is plain
//! ε-greedy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::duration::{DurationDistribution, DurationKind, DEFAULT_CAP};
use crate::error::{invalid, Error, Result};
use crate::option::RepeatOption;
use crate::rng::Rng64;

/// Anything that turns a row of action values into an action, one step at a time.
pub trait ActionSelector {
    fn select(&mut self, q_row: &[f64]) -> Result<usize>;

    /// Called when the environment ends an episode.
    fn episode_end(&mut self);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    EpsGreedy,
    #[default]
    EzGreedy,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::EpsGreedy => "eps_greedy",
            PolicyKind::EzGreedy => "ez_greedy",
        }
    }
}

/// How the greedy branch resolves equal action values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Uniform over the tied maximizers.
    #[default]
    Uniform,
    /// Lowest index among the tied maximizers.
    First,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationConfig {
    pub policy: PolicyKind,
    pub epsilon: f64,
    #[serde(default)]
    pub distribution: DurationKind,
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// Permit zeta exponents `mu ≤ 1` (the truncated law is still proper).
    #[serde(default)]
    pub allow_divergent: bool,
    /// Reproduce the pseudocode's reading where a sampled duration `n`
    /// yields `n + 1` executions of the action.
    #[serde(default)]
    pub pseudocode_literal: bool,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            policy: PolicyKind::EzGreedy,
            epsilon: 0.1,
            distribution: DurationKind::default(),
            cap: DEFAULT_CAP,
            allow_divergent: false,
            pseudocode_literal: false,
            tie_break: TieBreak::Uniform,
        }
    }
}

impl ExplorationConfig {
    pub fn eps_greedy(epsilon: f64) -> Self {
        Self { policy: PolicyKind::EpsGreedy, epsilon, distribution: DurationKind::Fixed { n: 1 }, ..Self::default() }
    }

    pub fn ez_greedy(epsilon: f64, distribution: DurationKind) -> Self {
        Self { policy: PolicyKind::EzGreedy, epsilon, distribution, ..Self::default() }
    }

    pub fn label(&self) -> &'static str {
        self.policy.label()
    }

    pub fn durations(&self) -> Result<DurationDistribution> {
        match self.policy {
            PolicyKind::EpsGreedy => DurationDistribution::new(DurationKind::Fixed { n: 1 }, 1),
            PolicyKind::EzGreedy => DurationDistribution::build(self.distribution, self.cap, self.allow_divergent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(invalid(format!("epsilon must lie in [0,1], got {}", self.epsilon)));
        }
        self.durations().map(|_| ())
    }
}

/// Index of a maximal entry, ties broken uniformly at random.
///
/// The rng is only consumed when there is more than one maximizer.
pub fn argmax_random_tie<R: Rng + ?Sized>(q_row: &[f64], rng: &mut R) -> Result<usize> {
    let first = *q_row.first().ok_or(Error::EmptyActionValues)?;
    let mut best = first;
    let mut best_idx = 0;
    let mut ties = 1usize;
    for (i, &q) in q_row.iter().enumerate().skip(1) {
        if q > best {
            best = q;
            best_idx = i;
            ties = 1;
        } else if q == best {
            ties += 1;
        }
    }
    if ties == 1 {
        return Ok(best_idx);
    }
    let mut pick = rng.random_range(0..ties);
    for (i, &q) in q_row.iter().enumerate() {
        if q == best {
            if pick == 0 {
                return Ok(i);
            }
            pick -= 1;
        }
    }
    unreachable!("tie count matched no entry")
}

/// Index of the first maximal entry.
pub fn argmax_first(q_row: &[f64]) -> Result<usize> {
    let mut best_idx = 0;
    let mut best = *q_row.first().ok_or(Error::EmptyActionValues)?;
    for (i, &q) in q_row.iter().enumerate().skip(1) {
        if q > best {
            best = q;
            best_idx = i;
        }
    }
    Ok(best_idx)
}

/// Standard ε-greedy: uniform over all actions with probability ε, greedy otherwise.
pub fn epsilon_greedy_select<R: Rng + ?Sized>(epsilon: f64, q_row: &[f64], rng: &mut R) -> Result<usize> {
    if q_row.is_empty() {
        return Err(Error::EmptyActionValues);
    }
    if rng.random::<f64>() < epsilon {
        Ok(rng.random_range(0..q_row.len()))
    } else {
        argmax_random_tie(q_row, rng)
    }
}

/// What produced the most recent action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Greedy,
    /// An option was just installed with the sampled duration.
    StartOption { duration: usize },
    /// The action came from an option installed earlier.
    ContinueOption,
}

/// εz-greedy exploration state.
#[derive(Clone, Debug)]
pub struct Explorer {
    epsilon: f64,
    policy: PolicyKind,
    durations: DurationDistribution,
    pseudocode_literal: bool,
    tie_break: TieBreak,
    active: Option<RepeatOption>,
    last: Option<Decision>,
    rng: Rng64,
}

impl Explorer {
    pub fn new(config: &ExplorationConfig, rng: Rng64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            epsilon: config.epsilon,
            policy: config.policy,
            durations: config.durations()?,
            pseudocode_literal: config.pseudocode_literal,
            tie_break: config.tie_break,
            active: None,
            last: None,
            rng,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub fn durations(&self) -> &DurationDistribution {
        &self.durations
    }

    pub fn active_option(&self) -> Option<&RepeatOption> {
        self.active.as_ref()
    }

    pub fn last_decision(&self) -> Option<Decision> {
        self.last
    }

    pub fn rng_mut(&mut self) -> &mut Rng64 {
        &mut self.rng
    }

    fn greedy(&mut self, q_row: &[f64]) -> Result<usize> {
        self.last = Some(Decision::Greedy);
        match self.tie_break {
            TieBreak::Uniform => argmax_random_tie(q_row, &mut self.rng),
            TieBreak::First => argmax_first(q_row),
        }
    }

    /// One step of the state machine.
    pub fn select(&mut self, q_row: &[f64]) -> Result<usize> {
        if q_row.is_empty() {
            return Err(Error::EmptyActionValues);
        }
        if self.policy == PolicyKind::EpsGreedy {
            let explore = self.rng.random::<f64>() < self.epsilon;
            return if explore {
                self.last = Some(Decision::StartOption { duration: 1 });
                Ok(self.rng.random_range(0..q_row.len()))
            } else {
                self.greedy(q_row)
            };
        }

        if let Some(option) = self.active.as_mut() {
            if option.action >= q_row.len() {
                return Err(Error::ActionOutOfRange { action: option.action, num_actions: q_row.len() });
            }
            let action = option.action;
            option.remaining -= 1;
            if option.remaining == 0 {
                self.active = None;
            }
            self.last = Some(Decision::ContinueOption);
            return Ok(action);
        }

        if self.rng.random::<f64>() < self.epsilon {
            let n = self.durations.sample(&mut self.rng);
            let action = self.rng.random_range(0..q_row.len());
            let remaining = if self.pseudocode_literal { n } else { n - 1 };
            if remaining > 0 {
                self.active = Some(RepeatOption { action, total_steps: remaining + 1, remaining });
            }
            self.last = Some(Decision::StartOption { duration: remaining + 1 });
            Ok(action)
        } else {
            self.greedy(q_row)
        }
    }

    /// Drops any active option so repeats never span an episode boundary.
    pub fn notify_episode_end(&mut self) {
        self.active = None;
    }
}

impl ActionSelector for Explorer {
    fn select(&mut self, q_row: &[f64]) -> Result<usize> {
        Explorer::select(self, q_row)
    }

    fn episode_end(&mut self) {
        self.notify_episode_end();
    }
}
