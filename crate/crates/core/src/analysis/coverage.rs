use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::GreedyPolicy;
use crate::duration::{DurationDistribution, DurationKind, DEFAULT_CAP};
use crate::env::{EnvSpec, TabularModel, Transition};
use crate::error::{invalid, Error, Result};
use crate::explore::argmax_random_tie;
use crate::option::{primitive_options, repeat_options, OptionSpec, Termination};
use crate::rng::{stream, tag, TrialSeeds};

pub const DEFAULT_ROLLOUT_SEED: u64 = 0x00C0_FFEE;

/// Option sets as they appear in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptionSetSpec {
    /// `{ω_a}`: one primitive option per action.
    Primitive,
    /// `{ω_an}` for every action and every `n` in the support of a truncated law.
    Repeat {
        distribution: DurationKind,
        cap: usize,
        #[serde(default)]
        allow_divergent: bool,
    },
    /// `{ω_ak}` for every action and one fixed length.
    Fixed { steps: usize },
    Explicit { options: Vec<OptionSpec> },
}

impl OptionSetSpec {
    pub fn build(&self, num_actions: usize) -> Result<Vec<OptionSpec>> {
        let options = match self {
            OptionSetSpec::Primitive => primitive_options(num_actions),
            OptionSetSpec::Repeat { distribution, cap, allow_divergent } => {
                repeat_options(num_actions, &DurationDistribution::build(*distribution, *cap, *allow_divergent)?)
            }
            OptionSetSpec::Fixed { steps } => (0..num_actions).map(|a| OptionSpec::repeat(a, *steps)).collect(),
            OptionSetSpec::Explicit { options } => options.clone(),
        };
        if options.is_empty() {
            return Err(invalid("option set is empty"));
        }
        for o in &options {
            o.validate(num_actions)?;
        }
        Ok(options)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub env: EnvSpec,
    pub options: OptionSetSpec,
    pub epsilon: f64,
    #[serde(default)]
    pub greedy: GreedyPolicy,
    /// Longest option execution expanded by the search.
    #[serde(default)]
    pub truncation: Option<usize>,
    /// Monte-Carlo cross-check length; zero disables it.
    #[serde(default)]
    pub rollout_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub num_states: usize,
    pub num_actions: usize,
    /// `(state, action)` pairs executed in some reachable product node.
    pub reachable: Vec<(usize, usize)>,
    /// Every other decision-state pair.
    pub unreachable: Vec<(usize, usize)>,
    pub truncation: usize,
    pub product_nodes_reached: u64,
}

impl CoverageResult {
    pub fn full_coverage(&self) -> bool {
        self.unreachable.is_empty()
    }

    pub fn is_reachable(&self, state: usize, action: usize) -> bool {
        self.reachable.binary_search(&(state, action)).is_ok()
    }
}

/// Option progress within the product automaton.
///
/// `Exact` options are identified by what is left to do, which lets every
/// `ω_an` share nodes; per-step-termination options by how far they got.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Progress {
    Idle,
    Exact { action: usize, remaining: usize },
    Geometric { option: usize, executed: usize },
}

struct Automaton<'a> {
    model: &'a dyn TabularModel,
    num_actions: usize,
    truncation: usize,
    /// Distinct per-step-termination options: `(action, beta)`.
    geometric: Vec<(usize, f64)>,
    /// `(action, progress after the first step)` for every option start.
    starts: Vec<(usize, Vec<Progress>)>,
    transitions: Vec<Vec<Transition>>,
}

impl<'a> Automaton<'a> {
    fn progress_count(&self) -> usize {
        1 + (self.num_actions + self.geometric.len()) * (self.truncation - 1).max(1)
    }

    fn encode(&self, p: Progress) -> usize {
        let span = (self.truncation - 1).max(1);
        match p {
            Progress::Idle => 0,
            Progress::Exact { action, remaining } => 1 + action * span + (remaining - 1),
            Progress::Geometric { option, executed } => 1 + (self.num_actions + option) * span + (executed - 1),
        }
    }

    /// Progress values after executing one more step of a geometric option.
    fn geometric_next(&self, option: usize, executed: usize, out: &mut Vec<Progress>) {
        out.push(Progress::Idle);
        if executed < self.truncation && self.geometric[option].1 < 1.0 {
            out.push(Progress::Geometric { option, executed });
        }
    }
}

/// Breadth-first reachability over `(state, option progress)`.
///
/// An edge exists wherever the mixed policy `(1−ε)·greedy + ε·uniform(Ω)`
/// puts positive probability. Episode ends lead back to `(start, idle)`.
pub fn coverage_check(
    model: &dyn TabularModel,
    options: &[OptionSpec],
    epsilon: f64,
    greedy: &GreedyPolicy,
    truncation: Option<usize>,
) -> Result<CoverageResult> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0,1], got {epsilon}")));
    }
    let num_actions = model.num_actions();
    let num_states = model.num_states();
    greedy.validate(num_actions)?;
    if epsilon > 0.0 && options.is_empty() {
        return Err(invalid("option set is empty"));
    }
    let longest_exact = options
        .iter()
        .filter_map(|o| match o.termination {
            Termination::AfterExactly { steps } => Some(steps),
            Termination::PerStepProbability { .. } => None,
        })
        .max()
        .unwrap_or(1);
    let has_geometric = options.iter().any(|o| o.max_steps().is_none());
    let truncation = truncation.unwrap_or(if has_geometric { longest_exact.max(DEFAULT_CAP) } else { longest_exact });
    if truncation < longest_exact {
        return Err(invalid(format!("truncation {truncation} is below the longest option duration {longest_exact}")));
    }

    let mut geometric: Vec<(usize, f64)> = Vec::new();
    let mut per_action: Vec<Vec<Progress>> = vec![Vec::new(); num_actions];
    for o in options {
        o.validate(num_actions)?;
        let after = &mut per_action[o.action];
        match o.termination {
            Termination::AfterExactly { steps: 1 } => after.push(Progress::Idle),
            Termination::AfterExactly { steps } => {
                after.push(Progress::Exact { action: o.action, remaining: steps - 1 })
            }
            Termination::PerStepProbability { beta } if beta >= 1.0 => after.push(Progress::Idle),
            Termination::PerStepProbability { beta } => {
                let idx = match geometric.iter().position(|&(a, b)| a == o.action && b == beta) {
                    Some(i) => i,
                    None => {
                        geometric.push((o.action, beta));
                        geometric.len() - 1
                    }
                };
                after.push(Progress::Idle);
                if truncation > 1 {
                    after.push(Progress::Geometric { option: idx, executed: 1 });
                }
            }
        }
    }
    let starts = per_action
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(a, mut v)| {
            v.sort();
            v.dedup();
            (a, v)
        })
        .collect();

    let mut transitions = Vec::with_capacity(num_states * num_actions);
    let mut decision = vec![false; num_states];
    for s in model.decision_states() {
        decision[s] = true;
    }
    for s in 0..num_states {
        for a in 0..num_actions {
            transitions.push(if decision[s] { model.transitions(s, a)? } else { Vec::new() });
        }
    }
    let automaton = Automaton { model, num_actions, truncation, geometric, starts, transitions };
    let progress_count = automaton.progress_count();
    let total_nodes = num_states
        .checked_mul(progress_count)
        .ok_or_else(|| invalid("product automaton is too large"))?;
    let mut seen = vec![0u64; total_nodes.div_ceil(64)];
    let mut executed = vec![false; num_states * num_actions];
    let mut queue: VecDeque<(usize, Progress)> = VecDeque::new();
    let mut reached = 0u64;

    let push = |s: usize, p: Progress, seen: &mut Vec<u64>, queue: &mut VecDeque<(usize, Progress)>| {
        let id = s * progress_count + automaton.encode(p);
        if seen[id / 64] & (1 << (id % 64)) == 0 {
            seen[id / 64] |= 1 << (id % 64);
            queue.push_back((s, p));
        }
    };
    let start = automaton.model.start_state();
    push(start, Progress::Idle, &mut seen, &mut queue);

    let mut moves: Vec<(usize, Progress)> = Vec::new();
    let mut scratch = Vec::new();
    while let Some((s, p)) = queue.pop_front() {
        reached += 1;
        moves.clear();
        match p {
            Progress::Idle => {
                if epsilon < 1.0 {
                    for a in greedy.support(Some(s), num_actions)? {
                        moves.push((a, Progress::Idle));
                    }
                }
                if epsilon > 0.0 {
                    for (a, after) in &automaton.starts {
                        moves.extend(after.iter().map(|&q| (*a, q)));
                    }
                }
            }
            Progress::Exact { action, remaining } => {
                let next =
                    if remaining == 1 { Progress::Idle } else { Progress::Exact { action, remaining: remaining - 1 } };
                moves.push((action, next));
            }
            Progress::Geometric { option, executed } => {
                scratch.clear();
                automaton.geometric_next(option, executed + 1, &mut scratch);
                let action = automaton.geometric[option].0;
                moves.extend(scratch.iter().map(|&q| (action, q)));
            }
        }
        for &(a, next_progress) in &moves {
            executed[s * num_actions + a] = true;
            for t in &automaton.transitions[s * num_actions + a] {
                if t.probability <= 0.0 {
                    continue;
                }
                if t.done {
                    push(start, Progress::Idle, &mut seen, &mut queue);
                } else {
                    push(t.next_state, next_progress, &mut seen, &mut queue);
                }
            }
        }
    }

    let mut reachable = Vec::new();
    let mut unreachable = Vec::new();
    for s in model.decision_states() {
        for a in 0..num_actions {
            if executed[s * num_actions + a] {
                reachable.push((s, a));
            } else {
                unreachable.push((s, a));
            }
        }
    }
    reachable.sort_unstable();
    unreachable.sort_unstable();
    Ok(CoverageResult {
        num_states,
        num_actions,
        reachable,
        unreachable,
        truncation,
        product_nodes_reached: reached,
    })
}

impl CoverageSpec {
    pub fn run(&self) -> Result<CoverageResult> {
        let mut rng = TrialSeeds::new(0, 0).rng(tag::ENV);
        let env = self.env.build(&mut rng)?;
        let model = env.tabular().ok_or_else(|| Error::NotTabular(env.name().to_string()))?;
        let options = self.options.build(model.num_actions())?;
        coverage_check(model, &options, self.epsilon, &self.greedy, self.truncation)
    }
}

/// Simulates the mixed option policy on the model and marks every executed
/// decision-state pair. Options are drawn uniformly from `options`;
/// per-step-termination options are cut at `truncation` steps, matching the
/// search.
#[allow(clippy::too_many_arguments)]
pub fn simulate_option_policy(
    model: &dyn TabularModel,
    options: &[OptionSpec],
    epsilon: f64,
    greedy: &GreedyPolicy,
    truncation: usize,
    steps: u64,
    seed: u64,
) -> Result<Vec<bool>> {
    let num_actions = model.num_actions();
    greedy.validate(num_actions)?;
    if options.is_empty() {
        return Err(invalid("option set is empty"));
    }
    let mut rng = stream(seed, tag::EXPLORER);
    let mut visited = vec![false; model.num_states() * num_actions];
    let start = model.start_state();
    let mut state = start;
    let mut active: Option<(usize, usize)> = None; // (option index, steps executed)
    let mut row = Vec::new();
    for _ in 0..steps {
        let action = match active {
            Some((o, _)) => options[o].action,
            None if rng.random::<f64>() < epsilon => {
                let o = rng.random_range(0..options.len());
                active = Some((o, 0));
                options[o].action
            }
            None => {
                greedy.q_row(Some(state), num_actions, &mut row)?;
                argmax_random_tie(&row, &mut rng)?
            }
        };
        if let Some((o, k)) = active {
            let k = k + 1;
            let finished = match options[o].termination {
                Termination::AfterExactly { steps } => k >= steps,
                Termination::PerStepProbability { beta } => k >= truncation || rng.random::<f64>() < beta,
            };
            active = if finished { None } else { Some((o, k)) };
        }
        visited[state * num_actions + action] = true;
        let outcomes = model.transitions(state, action)?;
        let mut u = rng.random::<f64>();
        let mut chosen = outcomes.last().ok_or_else(|| invalid("empty transition list"))?;
        for t in &outcomes {
            if u < t.probability {
                chosen = t;
                break;
            }
            u -= t.probability;
        }
        if chosen.done {
            state = start;
            active = None;
        } else {
            state = chosen.next_state;
        }
    }
    Ok(visited)
}
