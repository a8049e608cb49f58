//! Experiment runner for εz-greedy exploration.
//!
//! Each subcommand resolves a JSON config (optionally layered over a bundled
//! preset), runs its trials on a bounded worker pool and writes result files
//! once all trials have joined. Trials draw only from their own
//! `(seed, trial)` streams, so outputs do not depend on the worker count.

pub mod config;
pub mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use ezgreedy::analysis::{
    coverage_check, cover_time_trial, first_visit_trial, simulate_option_policy, CoverTimeReport, CoverageResult,
    FirstVisitGrid, FirstVisitLayout,
};
use ezgreedy::env::dump_transition_model;
use ezgreedy::learners::{run_training, TrialResult};
use ezgreedy::rng::{tag, TrialSeeds};
use ezgreedy::stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use config::{CoverTimeConfig, CoverageConfig, FirstVisitConfig, ModelDumpConfig, RunConfig, SweepConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    Sweep,
    FirstVisit,
    CoverTime,
    Coverage,
    ModelDump,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::FirstVisit => "first-visit",
            Command::CoverTime => "cover-time",
            Command::Coverage => "coverage",
            Command::ModelDump => "model-dump",
        }
    }
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Maps `f` over `0..n` on a pool of `workers` threads, keeping index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Mean undiscounted return of the last `ceil(fraction * len)` episodes.
pub fn final_window_mean(trial: &TrialResult, window: usize) -> f64 {
    let n = trial.logs.len();
    let k = window.clamp(1, n.max(1));
    let tail = &trial.logs[n.saturating_sub(k)..];
    tail.iter().map(|l| l.undiscounted_return).sum::<f64>() / tail.len().max(1) as f64
}

fn fraction_window(episodes: usize, fraction: f64) -> usize {
    ((episodes as f64 * fraction).ceil() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStat {
    pub episode: usize,
    /// Trials that ran this episode.
    pub trials: usize,
    pub mean_return: f64,
    pub median_return: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub env: String,
    pub policy: String,
    pub trials: usize,
    pub episodes: usize,
    pub final_window: usize,
    /// Per trial: mean return over the final window.
    pub final_window_returns: Vec<f64>,
    pub mean_final_return: f64,
    pub first_goal_episode: Vec<Option<usize>>,
    pub total_steps: Vec<u64>,
    pub per_episode: Vec<EpisodeStat>,
}

pub const SUMMARY_WINDOW: usize = 100;

impl RunSummary {
    pub fn new(cfg: &RunConfig, trials: &[TrialResult]) -> Self {
        let window = SUMMARY_WINDOW.min(cfg.episodes);
        let final_window_returns: Vec<f64> = trials.iter().map(|t| final_window_mean(t, window)).collect();
        let longest = trials.iter().map(|t| t.logs.len()).max().unwrap_or(0);
        let per_episode = (0..longest)
            .map(|e| {
                let returns: Vec<f64> =
                    trials.iter().filter_map(|t| t.logs.get(e)).map(|l| l.undiscounted_return).collect();
                EpisodeStat {
                    episode: e,
                    trials: returns.len(),
                    mean_return: stats::mean(&returns),
                    median_return: stats::median(&returns),
                }
            })
            .collect();
        Self {
            env: cfg.env.label().to_string(),
            policy: cfg.exploration.label().to_string(),
            trials: trials.len(),
            episodes: cfg.episodes,
            final_window: window,
            mean_final_return: stats::mean(&final_window_returns),
            final_window_returns,
            first_goal_episode: trials.iter().map(TrialResult::first_goal_episode).collect(),
            total_steps: trials.iter().map(|t| t.total_steps).collect(),
            per_episode,
        }
    }
}

pub fn run_trials(cfg: &RunConfig, workers: usize) -> Result<Vec<TrialResult>> {
    let spec = cfg.training();
    parallel_map(cfg.trials, workers, |t| {
        run_training(&spec, cfg.seed, t as u64).with_context(|| format!("trial {t}"))
    })
}

pub fn run(cfg: &RunConfig, out: &Path, workers: usize) -> Result<RunSummary> {
    let trials = run_trials(cfg, workers)?;
    let summary = RunSummary::new(cfg, &trials);
    fs::create_dir_all(out)?;
    output::write_file(&out.join("learning_curves.csv"), |w| output::learning_curves(w, &trials))?;
    if cfg.eval_every.is_some() {
        output::write_file(&out.join("greedy_eval.csv"), |w| output::greedy_evals(w, &trials))?;
    }
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    output::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mean: f64,
    pub std_error: f64,
    /// Per-trial metric, in trial order.
    pub metrics: Vec<f64>,
}

/// Runs every `(value, trial)` pair; trial `t` uses the same seed at every value.
pub fn sweep_points(cfg: &SweepConfig, workers: usize) -> Result<Vec<SweepPoint>> {
    let points = cfg.values.iter().map(|&v| cfg.point(v)).collect::<Result<Vec<_>>>()?;
    let trials = cfg.base.trials;
    let metrics = parallel_map(points.len() * trials, workers, |i| {
        let (p, t) = (i / trials, i % trials);
        let point = &points[p];
        let result = run_training(&point.training(), point.seed, t as u64)
            .with_context(|| format!("value {} trial {t}", cfg.values[p]))?;
        Ok(final_window_mean(&result, fraction_window(point.episodes, cfg.metric_fraction)))
    })?;
    Ok(cfg
        .values
        .iter()
        .zip(metrics.chunks(trials))
        .map(|(&value, m)| SweepPoint { value, mean: stats::mean(m), std_error: stats::std_error(m), metrics: m.to_vec() })
        .collect())
}

pub fn sweep(cfg: &SweepConfig, out: &Path, workers: usize) -> Result<Vec<SweepPoint>> {
    let points = sweep_points(cfg, workers)?;
    fs::create_dir_all(out)?;
    output::write_file(&out.join("sweep.csv"), |w| output::sweep_table(w, &points))?;
    output::write_file(&out.join("sweep_trials.csv"), |w| output::sweep_trials(w, &points))?;
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstVisitSummary {
    pub name: String,
    pub policy: String,
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub max_steps: u64,
    pub scale: String,
    /// Mean over cells that belong to the layout.
    pub mean_first_visit: f64,
    /// Cells never visited in any trial.
    pub never_visited: usize,
}

pub fn first_visit_grids(cfg: &FirstVisitConfig, workers: usize) -> Result<Vec<FirstVisitGrid>> {
    let mut rng = TrialSeeds::new(cfg.seed, 0).rng(tag::ENV);
    let probe = cfg.env.build(&mut rng)?;
    cfg.policies
        .iter()
        .map(|p| {
            let spec = cfg.spec(p);
            let layout = FirstVisitLayout::of(probe.as_ref(), cfg.discretization)?;
            let trials = parallel_map(cfg.trials, workers, |t| {
                first_visit_trial(&spec, cfg.seed, t as u64).with_context(|| format!("{} trial {t}", p.name))
            })?;
            Ok(FirstVisitGrid::from_trials(&spec, layout, &trials)?)
        })
        .collect()
}

pub fn first_visit(cfg: &FirstVisitConfig, out: &Path, workers: usize) -> Result<Vec<FirstVisitGrid>> {
    let grids = first_visit_grids(cfg, workers)?;
    fs::create_dir_all(out)?;
    let mut summaries = Vec::new();
    for (p, g) in cfg.policies.iter().zip(&grids) {
        output::write_file(&out.join(format!("first_visit_{}.csv", p.name)), |w| output::first_visit_matrix(w, g))?;
        output::write_file(&out.join(format!("first_visit_{}.pgm", p.name)), |w| g.write_pgm(w))?;
        let cells: Vec<f64> = g.mean.iter().zip(&g.layout.mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
        summaries.push(FirstVisitSummary {
            name: p.name.clone(),
            policy: p.exploration.label().to_string(),
            rows: g.rows(),
            cols: g.cols(),
            trials: g.trials,
            max_steps: g.max_steps,
            scale: g.scale.label().to_string(),
            mean_first_visit: stats::mean(&cells),
            never_visited: cells.iter().filter(|&&v| v >= g.max_steps as f64).count(),
        });
    }
    output::write_json(&out.join("first_visit.json"), &summaries)?;
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    Ok(grids)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedReport {
    pub name: String,
    pub report: CoverTimeReport,
}

pub fn cover_time_reports(cfg: &CoverTimeConfig, workers: usize) -> Result<Vec<NamedReport>> {
    cfg.policies
        .iter()
        .map(|p| {
            let spec = cfg.spec(p);
            let pairs = spec.pairs()?;
            let times = parallel_map(cfg.trials, workers, |t| {
                cover_time_trial(&spec, cfg.seed, t as u64).with_context(|| format!("{} trial {t}", p.name))
            })?;
            Ok(NamedReport { name: p.name.clone(), report: CoverTimeReport::from_trials(&spec, pairs, times) })
        })
        .collect()
}

pub fn cover_time(cfg: &CoverTimeConfig, out: &Path, workers: usize) -> Result<Vec<NamedReport>> {
    let reports = cover_time_reports(cfg, workers)?;
    fs::create_dir_all(out)?;
    output::write_file(&out.join("cover_time.csv"), |w| output::cover_times(w, &reports))?;
    output::write_json(&out.join("cover_time.json"), &reports)?;
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutCheck {
    pub steps: u64,
    /// Pairs the rollouts executed although the search flagged them unreachable.
    pub visited_unreachable: Vec<(usize, usize)>,
    pub reachable_unvisited: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub env: String,
    pub full_coverage: bool,
    #[serde(flatten)]
    pub result: CoverageResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rollout: Option<RolloutCheck>,
}

pub fn coverage_report(cfg: &CoverageConfig) -> Result<CoverageReport> {
    let env = cfg.env.build(&mut TrialSeeds::new(cfg.seed, 0).rng(tag::ENV))?;
    let model = env.tabular().ok_or_else(|| anyhow!("{} is not tabular", env.name()))?;
    let options = cfg.options.build(model.num_actions())?;
    let result = coverage_check(model, &options, cfg.epsilon, &cfg.greedy, cfg.truncation)?;
    let rollout = if cfg.rollout_steps > 0 {
        let visited = simulate_option_policy(
            model,
            &options,
            cfg.epsilon,
            &cfg.greedy,
            result.truncation,
            cfg.rollout_steps,
            cfg.seed,
        )?;
        let a = model.num_actions();
        let mut check = RolloutCheck { steps: cfg.rollout_steps, visited_unreachable: Vec::new(), reachable_unvisited: 0 };
        for s in model.decision_states() {
            for action in 0..a {
                match (visited[s * a + action], result.is_reachable(s, action)) {
                    (true, false) => check.visited_unreachable.push((s, action)),
                    (false, true) => check.reachable_unvisited += 1,
                    _ => {}
                }
            }
        }
        Some(check)
    } else {
        None
    };
    Ok(CoverageReport { env: cfg.env.label().to_string(), full_coverage: result.full_coverage(), result, rollout })
}

pub fn coverage(cfg: &CoverageConfig, out: &Path) -> Result<CoverageReport> {
    let report = coverage_report(cfg)?;
    fs::create_dir_all(out)?;
    output::write_file(&out.join("unreachable.csv"), |w| output::pairs(w, &report.result.unreachable))?;
    output::write_json(&out.join("coverage.json"), &report)?;
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    Ok(report)
}

pub fn model_dump(cfg: &ModelDumpConfig, out: &Path) -> Result<()> {
    let env = cfg.env.build(&mut TrialSeeds::new(cfg.seed, 0).rng(tag::ENV))?;
    let model = env.tabular().ok_or_else(|| anyhow!("{} is not tabular", env.name()))?;
    fs::create_dir_all(out)?;
    output::write_file(&out.join("transition_model.tsv"), |w| dump_transition_model(model, w))?;
    output::write_json(&out.join("resolved_config.json"), cfg)?;
    Ok(())
}

fn output_dir(flag: Option<&PathBuf>, config: Option<&PathBuf>) -> Result<PathBuf> {
    flag.or(config).cloned().ok_or_else(|| anyhow!("no output directory: pass --out or set output_dir"))
}

/// Resolves the config for `command` and runs it.
pub fn execute(command: Command, inv: &Invocation) -> Result<PathBuf> {
    let doc = presets::assemble(command, inv.config.as_deref(), inv.preset.as_deref(), inv.seed)?;
    let workers = inv.workers.unwrap_or_else(default_workers);
    let out = match command {
        Command::Run => {
            let cfg = config::run_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            run(&cfg, &out, workers)?;
            out
        }
        Command::Sweep => {
            let cfg = config::sweep_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            sweep(&cfg, &out, workers)?;
            out
        }
        Command::FirstVisit => {
            let cfg = config::first_visit_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            first_visit(&cfg, &out, workers)?;
            out
        }
        Command::CoverTime => {
            let cfg = config::cover_time_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            cover_time(&cfg, &out, workers)?;
            out
        }
        Command::Coverage => {
            let cfg = config::coverage_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            coverage(&cfg, &out)?;
            out
        }
        Command::ModelDump => {
            let cfg = config::model_dump_config(doc)?;
            let out = output_dir(inv.out.as_ref(), cfg.output_dir.as_ref())?;
            model_dump(&cfg, &out)?;
            out
        }
    };
    Ok(out)
}
