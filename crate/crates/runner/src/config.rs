//! Typed experiment configurations.
//!
//! Every document is resolved from JSON (see [`crate::presets`]) and echoed
//! back in full as `resolved_config.json`. The echo leaves out the output
//! directory, so a resolved config re-run elsewhere gives the same files.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use ezgreedy::analysis::{CoverTimeSpec, FirstVisitSpec, GreedyPolicy, OptionSetSpec, Scale, DEFAULT_ROLLOUT_SEED};
use ezgreedy::env::{EnvKind, EnvSpec};
use ezgreedy::learners::{LearnerSpec, TrainingSpec};
use ezgreedy::{DurationKind, ExplorationConfig, PolicyKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Epsilon placeholder tied to the DeepSea size.
pub const INVERSE_SIZE: &str = "1/(N+1)";

fn one() -> usize {
    1
}

fn default_fraction() -> f64 {
    0.1
}

fn default_rollout_seed() -> u64 {
    DEFAULT_ROLLOUT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub env: EnvSpec,
    pub learner: LearnerSpec,
    pub exploration: ExplorationConfig,
    pub episodes: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<usize>,
    #[serde(default = "one")]
    pub eval_episodes: usize,
    #[serde(default)]
    pub stop_on_goal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_steps: Option<u64>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn training(&self) -> TrainingSpec {
        TrainingSpec {
            env: self.env.clone(),
            learner: self.learner.clone(),
            exploration: self.exploration.clone(),
            episodes: self.episodes,
            eval_every: self.eval_every,
            eval_episodes: self.eval_episodes,
            stop_on_goal: self.stop_on_goal,
            max_total_steps: self.max_total_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        self.training().validate()?;
        Ok(())
    }
}

/// What a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Zeta exponent.
    Mu,
    /// Geometric continuation probability.
    Lambda,
    /// Uniform support size.
    N,
    Epsilon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub base: RunConfig,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// The metric averages the final `ceil(fraction * episodes)` episodes.
    #[serde(default = "default_fraction")]
    pub metric_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl SweepConfig {
    /// The run config of one sweep point. Every point shares the seed.
    pub fn point(&self, value: f64) -> Result<RunConfig> {
        let mut cfg = self.base.clone();
        cfg.seed = self.seed;
        let e = &mut cfg.exploration;
        match self.parameter {
            SweepParameter::Mu => {
                e.policy = PolicyKind::EzGreedy;
                e.distribution = DurationKind::Zeta { mu: value };
            }
            SweepParameter::Lambda => {
                e.policy = PolicyKind::EzGreedy;
                e.distribution = DurationKind::Geometric { lambda: value };
            }
            SweepParameter::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    bail!("uniform support size must be a positive integer, got {value}");
                }
                e.policy = PolicyKind::EzGreedy;
                e.distribution = DurationKind::Uniform { n: value as usize };
            }
            SweepParameter::Epsilon => e.epsilon = value,
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            bail!("sweep needs at least one value");
        }
        if !(self.metric_fraction > 0.0 && self.metric_fraction <= 1.0) {
            bail!("metric_fraction must lie in (0, 1]");
        }
        for &v in &self.values {
            self.point(v)?.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPolicy {
    pub name: String,
    pub exploration: ExplorationConfig,
}

fn check_policies(policies: &[NamedPolicy]) -> Result<()> {
    if policies.is_empty() {
        bail!("at least one policy is required");
    }
    for (i, p) in policies.iter().enumerate() {
        let ok = !p.name.is_empty() && p.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            bail!("policy name {:?} must be non-empty and use only [A-Za-z0-9_-]", p.name);
        }
        if policies[..i].iter().any(|q| q.name == p.name) {
            bail!("duplicate policy name {:?}", p.name);
        }
        p.exploration.validate()?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstVisitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub env: EnvSpec,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    pub policies: Vec<NamedPolicy>,
    pub trials: usize,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl FirstVisitConfig {
    pub fn spec(&self, policy: &NamedPolicy) -> FirstVisitSpec {
        FirstVisitSpec {
            env: self.env.clone(),
            exploration: policy.exploration.clone(),
            greedy: self.greedy.clone(),
            trials: self.trials,
            steps: self.steps,
            discretization: self.discretization,
            scale: self.scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_policies(&self.policies)?;
        for p in &self.policies {
            self.spec(p).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverTimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub env: EnvSpec,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    pub policies: Vec<NamedPolicy>,
    pub trials: usize,
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl CoverTimeConfig {
    pub fn spec(&self, policy: &NamedPolicy) -> CoverTimeSpec {
        CoverTimeSpec {
            env: self.env.clone(),
            exploration: policy.exploration.clone(),
            greedy: self.greedy.clone(),
            trials: self.trials,
            budget: self.budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_policies(&self.policies)?;
        for p in &self.policies {
            self.spec(p).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub env: EnvSpec,
    pub options: OptionSetSpec,
    pub epsilon: f64,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Monte-Carlo cross-check length; zero disables it.
    #[serde(default)]
    pub rollout_steps: u64,
    /// Seeds the cross-check rollouts and any randomized environment.
    #[serde(default = "default_rollout_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDumpConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub env: EnvSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

/// Replaces an `"1/(N+1)"` epsilon with its value for the DeepSea size in
/// the same block.
fn resolve_epsilon(block: &mut Value) -> Result<()> {
    let Some(eps) = block.pointer("/exploration/epsilon") else {
        return Ok(());
    };
    let Some(text) = eps.as_str() else {
        return Ok(());
    };
    if text != INVERSE_SIZE {
        bail!("epsilon must be a number or {INVERSE_SIZE:?}, got {text:?}");
    }
    let env: EnvSpec = serde_json::from_value(block.get("env").cloned().unwrap_or(Value::Null))
        .map_err(|e| anyhow!("invalid env: {e}"))?;
    let EnvKind::DeepSea { size, .. } = env.kind else {
        bail!("epsilon {INVERSE_SIZE:?} needs a deep_sea environment");
    };
    block["exploration"]["epsilon"] = Value::from(1.0 / (size as f64 + 1.0));
    Ok(())
}

fn typed<T: DeserializeOwned>(doc: Value) -> Result<T> {
    serde_json::from_value(doc).map_err(|e| anyhow!("invalid config: {e}"))
}

pub fn run_config(mut doc: Value) -> Result<RunConfig> {
    resolve_epsilon(&mut doc)?;
    let cfg: RunConfig = typed(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn sweep_config(mut doc: Value) -> Result<SweepConfig> {
    if let Some(base) = doc.get_mut("base") {
        resolve_epsilon(base)?;
    }
    let cfg: SweepConfig = typed(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn first_visit_config(doc: Value) -> Result<FirstVisitConfig> {
    let cfg: FirstVisitConfig = typed(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn cover_time_config(doc: Value) -> Result<CoverTimeConfig> {
    let cfg: CoverTimeConfig = typed(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn coverage_config(doc: Value) -> Result<CoverageConfig> {
    let cfg: CoverageConfig = typed(doc)?;
    if !cfg.env.is_tabular() {
        bail!("coverage needs a tabular environment, got {}", cfg.env.label());
    }
    cfg.greedy.validate(cfg.env.num_actions())?;
    Ok(cfg)
}

pub fn model_dump_config(doc: Value) -> Result<ModelDumpConfig> {
    let cfg: ModelDumpConfig = typed(doc)?;
    if !cfg.env.is_tabular() {
        bail!("model-dump needs a tabular environment, got {}", cfg.env.label());
    }
    Ok(cfg)
}
