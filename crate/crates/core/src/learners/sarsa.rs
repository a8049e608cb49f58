use rand::Rng;

use super::{EpisodeLog, StepEvent};
use crate::env::Environment;
use crate::error::{invalid, Error, Result};
use crate::explore::{argmax_random_tie, ActionSelector};
use crate::fa::LinearQ;
use crate::rng::Rng64;

fn default_true() -> bool {
    true
}

fn default_order() -> usize {
    5
}

/// Only accumulating traces are supported; the field exists so configs can
/// state it explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    #[default]
    Accumulating,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SarsaLambdaConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    #[serde(default = "default_order")]
    pub fourier_order: usize,
    #[serde(default)]
    pub trace_kind: TraceKind,
    #[serde(default)]
    pub weight_init_variance: f64,
    /// Divide the step size of feature `c` by `‖c‖₂`.
    #[serde(default = "default_true")]
    pub scale_learning_rates: bool,
}

impl SarsaLambdaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid(format!("gamma must lie in [0,1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(invalid(format!("lambda must lie in [0,1], got {}", self.lambda)));
        }
        if !(self.weight_init_variance >= 0.0 && self.weight_init_variance.is_finite()) {
            return Err(invalid("weight_init_variance must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Accumulating eligibility traces shaped like the weights.
///
/// Stored as `scale · raw` so that the per-step decay by `γλ` is a single
/// multiply; `raw` is folded back whenever `scale` gets small.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceVector {
    num_features: usize,
    raw: Vec<f64>,
    scale: f64,
    touched: Vec<bool>,
}

impl TraceVector {
    const RENORMALIZE_BELOW: f64 = 1e-100;

    pub fn new(num_actions: usize, num_features: usize) -> Self {
        Self { num_features, raw: vec![0.0; num_actions * num_features], scale: 1.0, touched: vec![false; num_actions] }
    }

    pub fn reset(&mut self) {
        self.raw.iter_mut().for_each(|v| *v = 0.0);
        self.touched.iter_mut().for_each(|t| *t = false);
        self.scale = 1.0;
    }

    /// Trace value of `(action, feature)`.
    pub fn get(&self, action: usize, feature: usize) -> f64 {
        self.scale * self.raw[action * self.num_features + feature]
    }

    pub fn is_zero(&self) -> bool {
        self.raw.iter().all(|&v| v == 0.0)
    }

    fn renormalize(&mut self) {
        let s = self.scale;
        self.raw.iter_mut().for_each(|v| *v *= s);
        self.scale = 1.0;
    }

    /// `e_a += φ`.
    pub fn accumulate(&mut self, action: usize, features: &[f64]) {
        let inv = self.prepare(action);
        let f = self.num_features;
        for (e, &p) in self.raw[action * f..(action + 1) * f].iter_mut().zip(features) {
            *e += p * inv;
        }
    }

    fn prepare(&mut self, action: usize) -> f64 {
        if self.scale < Self::RENORMALIZE_BELOW {
            self.renormalize();
        }
        self.touched[action] = true;
        1.0 / self.scale
    }

    /// `e *= factor`.
    pub fn decay(&mut self, factor: f64) {
        self.scale *= factor;
    }

    /// `e_a += φ`, then `w += step · (e ⊙ per_feature)`, in one pass per
    /// action. Actions never traced this episode are skipped.
    fn accumulate_and_apply(&mut self, action: usize, features: &[f64], weights: &mut [f64], step: f64, per_feature: &[f64]) {
        let inv = self.prepare(action);
        let f = self.num_features;
        let k = step * self.scale;
        for (a, touched) in self.touched.iter().enumerate() {
            if !touched {
                continue;
            }
            let w = &mut weights[a * f..(a + 1) * f];
            let e = &mut self.raw[a * f..(a + 1) * f];
            if a == action && k == 0.0 {
                for (e, &p) in e.iter_mut().zip(features) {
                    *e += p * inv;
                }
            } else if a == action {
                for (((w, e), &s), &p) in w.iter_mut().zip(e).zip(per_feature).zip(features) {
                    *e += p * inv;
                    *w += k * s * *e;
                }
            } else if k != 0.0 {
                for ((w, &e), &s) in w.iter_mut().zip(e.iter()).zip(per_feature) {
                    *w += k * s * e;
                }
            }
        }
    }
}

/// Runs one on-policy SARSA(λ) episode with accumulating traces.
///
/// Per step: `δ = r + γ Q(x', a') − Q(x, a)` (no bootstrap at true
/// terminals), `e_a += φ(x)`, `w += α_c δ e`, then `e *= γλ`. The next action
/// `a'` comes from the selector and is executed on the following step.
#[allow(clippy::too_many_arguments)]
pub fn sarsa_lambda_episode(
    q: &mut LinearQ,
    traces: &mut TraceVector,
    env: &mut dyn Environment,
    env_rng: &mut Rng64,
    selector: &mut dyn ActionSelector,
    cfg: &SarsaLambdaConfig,
    episode: usize,
    hook: &mut dyn FnMut(&StepEvent),
) -> Result<EpisodeLog> {
    let nf = q.num_features();
    let step_scales: Vec<f64> = if cfg.scale_learning_rates {
        q.basis().lr_scales().iter().map(|s| 1.0 / s).collect()
    } else {
        vec![1.0; nf]
    };
    let decay = cfg.gamma * cfg.lambda;
    let mut scratch = Vec::with_capacity(nf);
    let mut phi = Vec::with_capacity(nf);
    let mut phi_next = Vec::with_capacity(nf);
    let mut row = Vec::with_capacity(q.num_features());

    traces.reset();
    let mut log = EpisodeLog::new(episode);
    let mut discount = 1.0;

    let obs = env.reset(env_rng);
    q.basis().features_into(obs.vector()?, &mut phi, &mut scratch)?;
    q.row_from_features(&phi, &mut row);
    let mut action = selector.select(&row)?;

    loop {
        let step = env.step(action)?;
        log.record(step.reward, discount, step.goal);
        discount *= cfg.gamma;

        let q_sa = q.eval_features(&phi, action)?;

        let mut next_action = None;
        let mut target = step.reward;
        if !step.terminal() {
            q.basis().features_into(step.observation.vector()?, &mut phi_next, &mut scratch)?;
            q.row_from_features(&phi_next, &mut row);
            let a_next = selector.select(&row)?;
            target += cfg.gamma * row[a_next];
            next_action = Some(a_next);
        }
        let td = target - q_sa;
        if !td.is_finite() {
            return Err(Error::Diverged { episode, step: log.steps - 1 });
        }
        traces.accumulate_and_apply(action, &phi, q.weights_mut(), cfg.alpha * td, &step_scales);
        traces.decay(decay);

        hook(&StepEvent {
            step: log.steps - 1,
            action,
            reward: step.reward,
            done: step.done,
            target_action: next_action,
            td_error: td,
        });

        if step.done {
            selector.episode_end();
            if !q.is_finite() {
                return Err(Error::Diverged { episode, step: log.steps - 1 });
            }
            return Ok(log);
        }
        // Non-terminal, so the next features and action were computed above.
        std::mem::swap(&mut phi, &mut phi_next);
        action = next_action.expect("next action chosen for non-terminal step");
    }
}

/// Greedy rollout without learning.
pub fn linear_greedy_rollout(
    env: &mut dyn Environment,
    env_rng: &mut Rng64,
    q: &LinearQ,
    gamma: f64,
    tie_rng: &mut impl Rng,
) -> Result<EpisodeLog> {
    let mut log = EpisodeLog::new(0);
    let (mut phi, mut scratch, mut row) = (Vec::new(), Vec::new(), Vec::new());
    let mut obs = env.reset(env_rng);
    let mut discount = 1.0;
    loop {
        q.basis().features_into(obs.vector()?, &mut phi, &mut scratch)?;
        q.row_from_features(&phi, &mut row);
        let step = env.step(argmax_random_tie(&row, tie_rng)?)?;
        log.record(step.reward, discount, step.goal);
        discount *= gamma;
        if step.done {
            return Ok(log);
        }
        obs = step.observation;
    }
}
