//! Action-repeat options.
//!
//! Every option here has the whole state space as its initiation set and a
//! policy that repeats one primitive action. They differ only in how they
//! terminate: after an exact number of steps, or with a fixed probability
//! after each step.

use serde::{Deserialize, Serialize};

use crate::duration::DurationDistribution;
use crate::error::{invalid, Error, Result};

/// The option that repeats `action` for `total_steps` steps; `remaining`
/// counts executions still owed after the current one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepeatOption {
    pub action: usize,
    pub total_steps: usize,
    pub remaining: usize,
}

impl RepeatOption {
    /// Length of the history since initiation.
    pub fn elapsed(&self) -> usize {
        self.total_steps - self.remaining
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Terminates once the history reaches exactly `steps` actions.
    AfterExactly { steps: usize },
    /// Terminates after each action with probability `beta`.
    PerStepProbability { beta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub action: usize,
    pub termination: Termination,
}

impl OptionSpec {
    pub fn primitive(action: usize) -> Self {
        Self::repeat(action, 1)
    }

    pub fn repeat(action: usize, steps: usize) -> Self {
        Self { action, termination: Termination::AfterExactly { steps } }
    }

    pub fn geometric(action: usize, beta: f64) -> Self {
        Self { action, termination: Termination::PerStepProbability { beta } }
    }

    pub fn validate(&self, num_actions: usize) -> Result<()> {
        if self.action >= num_actions {
            return Err(Error::ActionOutOfRange { action: self.action, num_actions });
        }
        match self.termination {
            Termination::AfterExactly { steps } if steps == 0 => {
                Err(invalid("after_exactly options need at least one step"))
            }
            Termination::PerStepProbability { beta } if !(0.0..=1.0).contains(&beta) || beta == 0.0 => {
                // beta = 0 never terminates; that option could not be followed "until termination".
                Err(invalid(format!("termination probability must lie in (0,1], got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the option is just one primitive action.
    pub fn is_primitive(&self) -> bool {
        match self.termination {
            Termination::AfterExactly { steps } => steps == 1,
            Termination::PerStepProbability { beta } => beta == 1.0,
        }
    }

    /// Longest possible execution, `None` when unbounded.
    pub fn max_steps(&self) -> Option<usize> {
        match self.termination {
            Termination::AfterExactly { steps } => Some(steps),
            Termination::PerStepProbability { beta } if beta == 1.0 => Some(1),
            Termination::PerStepProbability { .. } => None,
        }
    }
}

/// `{ω_a : a ∈ A}`, which recovers standard ε-greedy.
pub fn primitive_options(num_actions: usize) -> Vec<OptionSpec> {
    (0..num_actions).map(OptionSpec::primitive).collect()
}

/// `{ω_an : a ∈ A, n ∈ supp(z)}` for a truncated duration law `z`.
pub fn repeat_options(num_actions: usize, durations: &DurationDistribution) -> Vec<OptionSpec> {
    let support: Vec<usize> = durations.support().collect();
    (0..num_actions)
        .flat_map(|a| support.iter().map(move |&n| OptionSpec::repeat(a, n)))
        .collect()
}
