use serde::{Deserialize, Serialize};

use super::{
    greedy_rollout, linear_greedy_rollout, q_learning_episode, sarsa_lambda_episode, EpisodeLog, QLearningConfig,
    SarsaLambdaConfig, TraceVector,
};
use crate::env::{EnvSpec, ObservationSpace};
use crate::error::{invalid, Error, Result};
use crate::explore::{ExplorationConfig, Explorer};
use crate::fa::{FourierBasis, LinearQ, TabularQ};
use crate::rng::{tag, TrialSeeds};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum LearnerSpec {
    QLearning(QLearningConfig),
    SarsaLambda(SarsaLambdaConfig),
}

impl LearnerSpec {
    pub fn gamma(&self) -> f64 {
        match self {
            LearnerSpec::QLearning(c) => c.gamma,
            LearnerSpec::SarsaLambda(c) => c.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::QLearning(c) => c.validate(),
            LearnerSpec::SarsaLambda(c) => c.validate(),
        }
    }
}

fn default_eval_episodes() -> usize {
    1
}

/// Everything one trial needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSpec {
    pub env: EnvSpec,
    pub learner: LearnerSpec,
    pub exploration: ExplorationConfig,
    pub episodes: usize,
    /// Run greedy evaluation rollouts after every `eval_every` training episodes.
    #[serde(default)]
    pub eval_every: Option<usize>,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    /// End the trial after the first episode that reaches the goal.
    #[serde(default)]
    pub stop_on_goal: bool,
    /// End the trial once this many environment steps have been taken
    /// (the current episode is always completed).
    #[serde(default)]
    pub max_total_steps: Option<u64>,
}

impl TrainingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(invalid("episodes must be positive"));
        }
        if self.eval_every == Some(0) {
            return Err(invalid("eval_every must be positive"));
        }
        if self.eval_every.is_some() && self.eval_episodes == 0 {
            return Err(invalid("eval_episodes must be positive"));
        }
        self.learner.validate()?;
        self.exploration.validate()?;
        match (&self.learner, self.env.is_tabular()) {
            (LearnerSpec::QLearning(_), false) => {
                Err(invalid(format!("q_learning needs a tabular environment, got {}", self.env.label())))
            }
            (LearnerSpec::SarsaLambda(_), true) => {
                Err(invalid(format!("sarsa_lambda needs a continuous environment, got {}", self.env.label())))
            }
            _ => Ok(()),
        }
    }
}

/// Final value function of a trial.
#[derive(Clone, Debug)]
pub enum Representation {
    Tabular(TabularQ),
    Linear(LinearQ),
}

/// Mean greedy return measured after `after_episode` training episodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyEval {
    pub after_episode: usize,
    pub mean_return: f64,
    pub mean_discounted_return: f64,
    pub goal_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: u64,
    pub logs: Vec<EpisodeLog>,
    pub evals: Vec<GreedyEval>,
    pub total_steps: u64,
    pub representation: Representation,
}

impl TrialResult {
    /// Index of the first training episode that reached the goal.
    pub fn first_goal_episode(&self) -> Option<usize> {
        self.logs.iter().find(|l| l.goal_reached).map(|l| l.episode)
    }
}

/// Trains one trial. Randomness is drawn from per-trial streams, so the
/// result depends only on `(spec, seed, trial)`.
pub fn run_training(spec: &TrainingSpec, seed: u64, trial: u64) -> Result<TrialResult> {
    spec.validate()?;
    let seeds = TrialSeeds::new(seed, trial);
    let mut env_rng = seeds.rng(tag::ENV);
    // The eval copy is built from an identical stream so randomized dynamics match.
    let mut eval_build_rng = env_rng.clone();
    let mut env = spec.env.build(&mut env_rng)?;
    let mut eval_env = if spec.eval_every.is_some() { Some(spec.env.build(&mut eval_build_rng)?) } else { None };
    let mut eval_rng = seeds.rng(tag::EVAL);
    let mut tie_rng = seeds.rng(tag::EVAL_TIES);
    let mut explorer = Explorer::new(&spec.exploration, seeds.rng(tag::EXPLORER))?;
    let gamma = spec.learner.gamma();

    let mut logs = Vec::with_capacity(spec.episodes);
    let mut evals = Vec::new();
    let mut total_steps = 0u64;

    let mut representation = match &spec.learner {
        LearnerSpec::QLearning(cfg) => {
            let model = env.tabular().ok_or_else(|| Error::NotTabular(env.name().to_string()))?;
            Representation::Tabular(TabularQ::new(model.num_states(), model.num_actions(), cfg.initial_value))
        }
        LearnerSpec::SarsaLambda(cfg) => {
            let (low, high) = match env.observation_space() {
                ObservationSpace::Box { low, high } => (low, high),
                ObservationSpace::Discrete { .. } => return Err(Error::ObservationKind("vector")),
            };
            let basis = FourierBasis::new(cfg.fourier_order, low, high)?;
            let mut init_rng = seeds.rng(tag::INIT);
            Representation::Linear(LinearQ::random_normal(basis, env.num_actions(), cfg.weight_init_variance, &mut init_rng)?)
        }
    };
    let mut traces = match &representation {
        Representation::Linear(q) => Some(TraceVector::new(env.num_actions(), q.num_features())),
        Representation::Tabular(_) => None,
    };

    for episode in 0..spec.episodes {
        let log = match (&spec.learner, &mut representation) {
            (LearnerSpec::QLearning(cfg), Representation::Tabular(q)) => {
                q_learning_episode(env.as_mut(), &mut env_rng, q, &mut explorer, cfg, episode, &mut |_, _| {})?
            }
            (LearnerSpec::SarsaLambda(cfg), Representation::Linear(q)) => sarsa_lambda_episode(
                q,
                traces.as_mut().expect("traces allocated for linear learners"),
                env.as_mut(),
                &mut env_rng,
                &mut explorer,
                cfg,
                episode,
                &mut |_| {},
            )?,
            _ => unreachable!("representation matches learner"),
        };
        total_steps += log.steps as u64;
        let reached = log.goal_reached;
        logs.push(log);

        if let (Some(every), Some(eval_env)) = (spec.eval_every, eval_env.as_mut()) {
            if (episode + 1) % every == 0 {
                let mut sum = (0.0, 0.0, 0usize);
                for _ in 0..spec.eval_episodes {
                    let l = match &representation {
                        Representation::Tabular(q) => {
                            greedy_rollout(eval_env.as_mut(), &mut eval_rng, q, gamma, &mut tie_rng)?
                        }
                        Representation::Linear(q) => {
                            linear_greedy_rollout(eval_env.as_mut(), &mut eval_rng, q, gamma, &mut tie_rng)?
                        }
                    };
                    sum.0 += l.undiscounted_return;
                    sum.1 += l.discounted_return;
                    sum.2 += usize::from(l.goal_reached);
                }
                let n = spec.eval_episodes as f64;
                evals.push(GreedyEval {
                    after_episode: episode + 1,
                    mean_return: sum.0 / n,
                    mean_discounted_return: sum.1 / n,
                    goal_fraction: sum.2 as f64 / n,
                });
            }
        }

        if (spec.stop_on_goal && reached) || spec.max_total_steps.is_some_and(|m| total_steps >= m) {
            break;
        }
    }
    Ok(TrialResult { trial, logs, evals, total_steps, representation })
}
