use serde::{Deserialize, Serialize};

use super::policy::{rollout, GreedyPolicy, PolicyRunner, RolloutEvent};
use crate::env::EnvSpec;
use crate::error::{invalid, Error, Result};
use crate::explore::ExplorationConfig;
use crate::rng::{tag, TrialSeeds};
use crate::stats::median_with_censoring;

fn default_trials() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverTimeSpec {
    pub env: EnvSpec,
    pub exploration: ExplorationConfig,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Step budget per trial.
    pub budget: u64,
}

impl CoverTimeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.budget == 0 {
            return Err(invalid("budget must be positive"));
        }
        if !self.env.is_tabular() {
            return Err(Error::NotTabular(self.env.label().to_string()));
        }
        self.exploration.validate()?;
        self.greedy.validate(self.env.num_actions())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverTimeReport {
    pub env: String,
    pub policy: String,
    pub trials: usize,
    pub budget: u64,
    /// Number of decision-state/action pairs to cover.
    pub pairs: usize,
    /// Steps until the last pair was first executed; `None` if not covered within budget.
    pub cover_times: Vec<Option<u64>>,
    pub covered_trials: usize,
    /// Median over trials; absent unless at least half of them covered.
    pub median: Option<f64>,
}

impl CoverTimeReport {
    pub fn from_trials(spec: &CoverTimeSpec, pairs: usize, cover_times: Vec<Option<u64>>) -> Self {
        Self {
            env: spec.env.label().to_string(),
            policy: spec.exploration.label().to_string(),
            trials: cover_times.len(),
            budget: spec.budget,
            pairs,
            covered_trials: cover_times.iter().filter(|t| t.is_some()).count(),
            median: median_with_censoring(&cover_times),
            cover_times,
        }
    }

    pub fn covered(&self) -> bool {
        self.median.is_some()
    }
}

fn pair_count(spec: &CoverTimeSpec) -> Result<usize> {
    let mut rng = TrialSeeds::new(0, 0).rng(tag::ENV);
    let env = spec.env.build(&mut rng)?;
    let model = env.tabular().ok_or_else(|| Error::NotTabular(env.name().to_string()))?;
    Ok(model.decision_states().len() * model.num_actions())
}

/// Steps needed to execute every action in every decision state, or `None`.
pub fn cover_time_trial(spec: &CoverTimeSpec, seed: u64, trial: u64) -> Result<Option<u64>> {
    spec.validate()?;
    let seeds = TrialSeeds::new(seed, trial);
    let mut env_rng = seeds.rng(tag::ENV);
    let mut env = spec.env.build(&mut env_rng)?;
    let (num_states, num_actions, mut remaining, decision) = {
        let model = env.tabular().ok_or_else(|| Error::NotTabular(env.name().to_string()))?;
        let mut decision = vec![false; model.num_states()];
        for s in model.decision_states() {
            decision[s] = true;
        }
        let pairs = decision.iter().filter(|&&d| d).count() * model.num_actions();
        (model.num_states(), model.num_actions(), pairs, decision)
    };
    let mut visited = vec![false; num_states * num_actions];
    let mut policy = PolicyRunner::new(&spec.exploration, spec.greedy.clone(), seeds.rng(tag::EXPLORER))?;
    let mut cover = None;
    let mut failure = None;
    rollout(env.as_mut(), &mut env_rng, &mut policy, spec.budget, &mut |event| {
        if let RolloutEvent::Act { t, observation, action, .. } = event {
            let s = match observation.discrete() {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e);
                    return false;
                }
            };
            let i = s * num_actions + action;
            if decision[s] && !visited[i] {
                visited[i] = true;
                remaining -= 1;
                if remaining == 0 {
                    cover = Some(t + 1);
                    return false;
                }
            }
        }
        true
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(cover),
    }
}

/// Runs every trial in order.
pub fn cover_time(spec: &CoverTimeSpec, seed: u64) -> Result<CoverTimeReport> {
    spec.validate()?;
    let times = (0..spec.trials as u64).map(|t| cover_time_trial(spec, seed, t)).collect::<Result<Vec<_>>>()?;
    Ok(CoverTimeReport::from_trials(spec, pair_count(spec)?, times))
}

impl CoverTimeSpec {
    /// Pairs that must be covered.
    pub fn pairs(&self) -> Result<usize> {
        pair_count(self)
    }
}
