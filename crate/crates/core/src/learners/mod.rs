//! Tabular Q-learning and linear SARSA(λ).
//!
//! Both learners update on every primitive step, whether the action came from
//! the greedy branch or from an exploratory option.

mod qlearning;
mod sarsa;
mod training;

pub use qlearning::{greedy_rollout, q_learning_episode, q_learning_update, QLearningConfig};
pub use sarsa::{linear_greedy_rollout, sarsa_lambda_episode, SarsaLambdaConfig, TraceKind, TraceVector};
pub use training::{run_training, GreedyEval, LearnerSpec, Representation, TrainingSpec, TrialResult};

/// Per-episode summary.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub undiscounted_return: f64,
    pub discounted_return: f64,
    pub steps: usize,
    pub goal_reached: bool,
    /// Step index (0-based) of the first goal event within the episode.
    pub first_goal_step: Option<usize>,
}

impl EpisodeLog {
    pub(crate) fn new(episode: usize) -> Self {
        Self {
            episode,
            undiscounted_return: 0.0,
            discounted_return: 0.0,
            steps: 0,
            goal_reached: false,
            first_goal_step: None,
        }
    }

    pub(crate) fn record(&mut self, reward: f64, discount: f64, goal: bool) {
        self.undiscounted_return += reward;
        self.discounted_return += discount * reward;
        if goal && !self.goal_reached {
            self.goal_reached = true;
            self.first_goal_step = Some(self.steps);
        }
        self.steps += 1;
    }
}

/// What happened on one learner step; handed to instrumentation hooks.
#[derive(Clone, Debug, PartialEq)]
pub struct StepEvent {
    pub step: usize,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
    /// The action whose value entered the TD target (SARSA only).
    pub target_action: Option<usize>,
    pub td_error: f64,
}
