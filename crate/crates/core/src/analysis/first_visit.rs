use std::io::Write;

use serde::{Deserialize, Serialize};

use super::policy::{rollout, GreedyPolicy, PolicyRunner, RolloutEvent};
use crate::env::{EnvSpec, Environment, Observation, Projection};
use crate::error::{invalid, Result};
use crate::explore::ExplorationConfig;
use crate::rng::{tag, TrialSeeds};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    /// `log(mean + 1)`.
    Log,
}

impl Scale {
    pub fn apply(&self, value: f64) -> f64 {
        match self {
            Scale::Linear => value,
            Scale::Log => value.ln_1p(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstVisitSpec {
    pub env: EnvSpec,
    pub exploration: ExplorationConfig,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    pub trials: usize,
    /// Environment steps per trial.
    pub steps: u64,
    /// Bins per projection axis; continuous environments only.
    #[serde(default)]
    pub discretization: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
}

/// How observations map onto map cells.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstVisitLayout {
    pub rows: usize,
    pub cols: usize,
    /// Cells that correspond to a state (DeepSea only fills a triangle).
    pub mask: Vec<bool>,
    /// Set for continuous environments: columns bin axis 0, rows bin axis 1.
    pub projection: Option<Projection>,
}

impl FirstVisitLayout {
    pub fn of(env: &dyn Environment, discretization: Option<usize>) -> Result<Self> {
        match (env.tabular(), discretization) {
            (Some(_), Some(_)) => Err(invalid(format!("{} is tabular; discretization must be absent", env.name()))),
            (Some(model), None) => {
                let (rows, cols) = model.layout();
                let mut mask = vec![false; rows * cols];
                for s in model.states() {
                    if let Some((r, c)) = model.cell(s) {
                        mask[r * cols + c] = true;
                    }
                }
                Ok(Self { rows, cols, mask, projection: None })
            }
            (None, None) => Err(invalid(format!("{} is continuous; a discretization is required", env.name()))),
            (None, Some(0)) => Err(invalid("discretization must be positive")),
            (None, Some(d)) => {
                let projection = env.projection().ok_or_else(|| invalid("environment has no 2-D projection"))?;
                Ok(Self { rows: d, cols: d, mask: vec![true; d * d], projection: Some(projection) })
            }
        }
    }

    fn bin(value: f64, (low, high): (f64, f64), bins: usize) -> usize {
        let x = ((value - low) / (high - low)).clamp(0.0, 1.0);
        ((x * bins as f64) as usize).min(bins - 1)
    }

    /// Cell index of an observation, if it lands on the map.
    pub fn locate(&self, env: &dyn Environment, observation: &Observation) -> Option<usize> {
        match (&self.projection, env.tabular()) {
            (Some(p), _) => {
                let [x, y] = env.project(observation)?;
                let c = Self::bin(x, p.bounds[0], self.cols);
                let r = Self::bin(y, p.bounds[1], self.rows);
                Some(r * self.cols + c)
            }
            (None, Some(model)) => {
                let (r, c) = model.cell(observation.discrete().ok()?)?;
                Some(r * self.cols + c)
            }
            (None, None) => None,
        }
    }
}

/// Mean first-visit step per cell over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstVisitGrid {
    pub layout: FirstVisitLayout,
    pub trials: usize,
    pub max_steps: u64,
    pub scale: Scale,
    /// Row-major means; cells that never saw a visit in a trial count `max_steps` for it.
    pub mean: Vec<f64>,
}

impl FirstVisitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.steps == 0 {
            return Err(invalid("steps must be positive"));
        }
        self.exploration.validate()?;
        self.greedy.validate(self.env.num_actions())
    }
}

/// First-visit step of every cell in one trial (`steps` for cells never seen).
pub fn first_visit_trial(spec: &FirstVisitSpec, seed: u64, trial: u64) -> Result<Vec<u64>> {
    spec.validate()?;
    let seeds = TrialSeeds::new(seed, trial);
    let mut env_rng = seeds.rng(tag::ENV);
    // A second instance answers layout queries while the first one is stepped.
    let probe = spec.env.build(&mut env_rng.clone())?;
    let mut env = spec.env.build(&mut env_rng)?;
    let layout = FirstVisitLayout::of(probe.as_ref(), spec.discretization)?;
    let mut policy = PolicyRunner::new(&spec.exploration, spec.greedy.clone(), seeds.rng(tag::EXPLORER))?;
    let mut first = vec![spec.steps; layout.rows * layout.cols];
    let mut seen = vec![false; first.len()];
    let mut unseen = layout.mask.iter().filter(|&&m| m).count();
    rollout(env.as_mut(), &mut env_rng, &mut policy, spec.steps, &mut |event| {
        if let RolloutEvent::Observe { t, observation } = event {
            if let Some(cell) = layout.locate(probe.as_ref(), observation) {
                if !seen[cell] {
                    seen[cell] = true;
                    first[cell] = t;
                    unseen = unseen.saturating_sub(1);
                }
            }
        }
        // Nothing left to discover.
        unseen > 0
    })?;
    Ok(first)
}

impl FirstVisitGrid {
    /// Averages per-trial first-visit steps (in trial order).
    pub fn from_trials(spec: &FirstVisitSpec, layout: FirstVisitLayout, trials: &[Vec<u64>]) -> Result<Self> {
        let cells = layout.rows * layout.cols;
        if trials.is_empty() || trials.iter().any(|t| t.len() != cells) {
            return Err(invalid("trial results do not match the layout"));
        }
        let mut sum = vec![0.0; cells];
        for t in trials {
            for (s, &v) in sum.iter_mut().zip(t) {
                *s += v as f64;
            }
        }
        let n = trials.len() as f64;
        let mean = sum.into_iter().map(|s| s / n).collect();
        Ok(Self { layout, trials: trials.len(), max_steps: spec.steps, scale: spec.scale, mean })
    }

    pub fn rows(&self) -> usize {
        self.layout.rows
    }

    pub fn cols(&self) -> usize {
        self.layout.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.mean[row * self.layout.cols + col]
    }

    pub fn scaled(&self) -> Vec<f64> {
        self.mean.iter().map(|&m| self.scale.apply(m)).collect()
    }

    /// Scaled value of a cell never visited in any trial.
    pub fn scaled_max(&self) -> f64 {
        self.scale.apply(self.max_steps as f64)
    }

    /// 8-bit gray levels, `round(255 · scaled / scaled_max)`.
    pub fn gray_levels(&self) -> Vec<u8> {
        let top = self.scaled_max();
        self.scaled()
            .into_iter()
            .map(|v| if top > 0.0 { (255.0 * v / top).round().clamp(0.0, 255.0) as u8 } else { 0 })
            .collect()
    }

    /// Binary P5 graymap, row-major, maxval 255.
    pub fn write_pgm<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.layout.cols, self.layout.rows)?;
        out.write_all(&self.gray_levels())
    }

    /// Mean first-visit steps as a headerless numeric matrix.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for row in self.mean.chunks(self.layout.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Runs every trial in order and averages them.
pub fn first_visit_map(spec: &FirstVisitSpec, seed: u64) -> Result<FirstVisitGrid> {
    spec.validate()?;
    let mut rng = TrialSeeds::new(seed, 0).rng(tag::ENV);
    let layout = FirstVisitLayout::of(spec.env.build(&mut rng)?.as_ref(), spec.discretization)?;
    let trials = (0..spec.trials as u64).map(|t| first_visit_trial(spec, seed, t)).collect::<Result<Vec<_>>>()?;
    FirstVisitGrid::from_trials(spec, layout, &trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duration::DurationKind;

    fn grid_spec(steps: u64) -> FirstVisitSpec {
        FirstVisitSpec {
            env: EnvSpec::grid_world(7, 7),
            exploration: ExplorationConfig::ez_greedy(1.0, DurationKind::Zeta { mu: 2.0 }),
            greedy: GreedyPolicy::Uniform,
            trials: 4,
            steps,
            discretization: None,
            scale: Scale::Linear,
        }
    }

    #[test]
    fn start_cell_is_visited_at_step_zero() {
        let grid = first_visit_map(&grid_spec(200), 9).unwrap();
        assert_eq!(grid.get(1, 3), 0.0);
        assert!(grid.mean.iter().all(|&m| (0.0..=200.0).contains(&m)));
    }

    #[test]
    fn tabular_env_rejects_discretization() {
        let spec = FirstVisitSpec { discretization: Some(4), ..grid_spec(10) };
        assert!(first_visit_trial(&spec, 0, 0).is_err());
    }

    #[test]
    fn pgm_header_and_levels() {
        let grid = first_visit_map(&FirstVisitSpec { trials: 1, ..grid_spec(5) }, 1).unwrap();
        let mut buf = Vec::new();
        grid.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n7 7\n255\n"));
        assert_eq!(buf.len(), "P5\n7 7\n255\n".len() + 49);
        // Unvisited cells are at the maximum level, the start cell at zero.
        assert_eq!(grid.gray_levels()[48], 255);
        assert_eq!(grid.gray_levels()[7 + 3], 0);
    }

    #[test]
    fn log_scale() {
        assert!((Scale::Log.apply(std::f64::consts::E - 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(Scale::Linear.apply(3.0), 3.0);
    }
}
