use std::f64::consts::PI;

use ezgreedy::env::{DeepSea, EnvSpec, Environment, Observation, ObservationSpace, StepResult};
use ezgreedy::explore::{ActionSelector, TieBreak};
use ezgreedy::fa::{FourierBasis, LinearQ, TabularQ};
use ezgreedy::learners::{
    greedy_rollout, q_learning_episode, q_learning_update, run_training, sarsa_lambda_episode, LearnerSpec,
    QLearningConfig, Representation, SarsaLambdaConfig, TraceKind, TraceVector, TrainingSpec,
};
use ezgreedy::rng::{stream, Rng64};
use ezgreedy::{DurationKind, ExplorationConfig, Explorer, Result};

/// Deterministic three-state MDP: `next[s][a]`, `reward[s][a]`, and whether
/// the transition ends the episode.
const NEXT: [[usize; 2]; 3] = [[1, 0], [2, 0], [0, 1]];
const REWARD: [[f64; 2]; 3] = [[0.0, 0.1], [0.0, 0.2], [1.0, 0.0]];
const ENDS: [[bool; 2]; 3] = [[false, false], [false, false], [true, false]];

fn value_iteration(gamma: f64) -> [[f64; 2]; 3] {
    let mut q = [[0.0f64; 2]; 3];
    for _ in 0..5000 {
        let mut next = q;
        for s in 0..3 {
            for a in 0..2 {
                let v = if ENDS[s][a] { 0.0 } else { q[NEXT[s][a]][0].max(q[NEXT[s][a]][1]) };
                next[s][a] = REWARD[s][a] + gamma * v;
            }
        }
        q = next;
    }
    q
}

#[test]
fn q_learning_reaches_the_value_iteration_fixed_point() {
    let gamma = 0.9;
    let cfg = QLearningConfig { alpha: 0.5, gamma, initial_value: 0.0 };
    let mut q = TabularQ::new(3, 2, 0.0);
    for _ in 0..3000 {
        for s in 0..3 {
            for a in 0..2 {
                q_learning_update(&mut q, s, a, REWARD[s][a], NEXT[s][a], ENDS[s][a], &cfg).unwrap();
            }
        }
    }
    let oracle = value_iteration(gamma);
    for s in 0..3 {
        for a in 0..2 {
            assert!((q.get(s, a).unwrap() - oracle[s][a]).abs() < 1e-9, "Q({s},{a})");
        }
    }
}

#[test]
fn q_learning_on_the_chain_matches_backward_induction() {
    let gamma = 0.9;
    let spec = TrainingSpec {
        env: EnvSpec::chain(3).with_max_steps(100),
        learner: LearnerSpec::QLearning(QLearningConfig { alpha: 1.0, gamma, initial_value: 0.0 }),
        exploration: ExplorationConfig::eps_greedy(1.0),
        episodes: 3000,
        eval_every: None,
        eval_episodes: 1,
        stop_on_goal: false,
        max_total_steps: None,
    };
    let result = run_training(&spec, 5, 0).unwrap();
    let Representation::Tabular(q) = result.representation else { panic!("tabular") };
    let chain = ezgreedy::env::Chain::new(3, 100).unwrap();
    let last = chain.len() - 1;
    let mut v_next = 0.0;
    for x in (0..=last).rev() {
        let cash = chain.deposit(x);
        let advance = if x == last { cash } else { gamma * v_next };
        assert!((q.get(x, 1).unwrap() - cash).abs() < 1e-9);
        assert!((q.get(x, 0).unwrap() - advance).abs() < 1e-9, "advance at {x}");
        v_next = cash.max(advance);
    }
}

/// Continuous test environment over one observation dimension in `[0, 1]`.
struct Scripted {
    positions: Vec<f64>,
    /// `(next position index, reward, terminal)` per position index.
    moves: Vec<(usize, f64, bool)>,
    limit: usize,
    at: usize,
    t: usize,
}

impl Environment for Scripted {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn num_actions(&self) -> usize {
        1
    }

    fn observation_space(&self) -> ObservationSpace {
        ObservationSpace::Box { low: vec![0.0], high: vec![1.0] }
    }

    fn max_episode_steps(&self) -> usize {
        self.limit
    }

    fn reset(&mut self, _rng: &mut Rng64) -> Observation {
        self.at = 0;
        self.t = 0;
        Observation::Vector(vec![self.positions[0]])
    }

    fn step(&mut self, _action: usize) -> Result<StepResult> {
        let (next, reward, terminal) = self.moves[self.at];
        self.at = next;
        self.t += 1;
        let truncated = !terminal && self.t >= self.limit;
        Ok(StepResult {
            observation: Observation::Vector(vec![self.positions[next]]),
            reward,
            done: terminal || truncated,
            truncated,
            goal: false,
        })
    }
}

struct Always;

impl ActionSelector for Always {
    fn select(&mut self, _q_row: &[f64]) -> Result<usize> {
        Ok(0)
    }

    fn episode_end(&mut self) {}
}

fn sarsa(alpha: f64, gamma: f64, lambda: f64, order: usize) -> SarsaLambdaConfig {
    SarsaLambdaConfig {
        alpha,
        gamma,
        lambda,
        fourier_order: order,
        trace_kind: TraceKind::Accumulating,
        weight_init_variance: 0.0,
        scale_learning_rates: true,
    }
}

#[test]
fn lambda_zero_matches_one_step_sarsa() {
    let x = 0.3;
    let order = 3;
    let mut env = Scripted { positions: vec![x], moves: vec![(0, 1.0, true)], limit: 10, at: 0, t: 0 };
    let basis = FourierBasis::new(order, vec![0.0], vec![1.0]).unwrap();
    let mut q = LinearQ::zeros(basis, 1);
    let mut traces = TraceVector::new(1, q.num_features());
    let cfg = sarsa(0.1, 0.0, 0.0, order);
    sarsa_lambda_episode(&mut q, &mut traces, &mut env, &mut stream(0, 0), &mut Always, &cfg, 0, &mut |_| {}).unwrap();

    // One-step oracle: w_c = α δ φ_c / ‖c‖ with δ = r = 1.
    let mut expected = 0.0;
    for c in 0..=order {
        let phi = (PI * c as f64 * x).cos();
        let scale = if c == 0 { 1.0 } else { c as f64 };
        let w = 0.1 * phi / scale;
        assert!((q.weights()[c] - w).abs() < 1e-15);
        expected += w * phi;
    }
    let got = q.eval_features(&q.features(&Observation::Vector(vec![x])).unwrap(), 0).unwrap();
    assert!((got - expected).abs() < 1e-15);
}

#[test]
fn linear_policy_evaluation_on_two_states() {
    // 0 → 1 pays nothing, 1 → 0 pays 1; a continuing task cut by a time limit.
    let gamma = 0.9;
    let mut env =
        Scripted { positions: vec![0.0, 1.0], moves: vec![(1, 0.0, false), (0, 1.0, false)], limit: 40, at: 0, t: 0 };
    let basis = FourierBasis::new(1, vec![0.0], vec![1.0]).unwrap();
    let mut q = LinearQ::zeros(basis, 1);
    let mut traces = TraceVector::new(1, q.num_features());
    let cfg = sarsa(0.05, gamma, 0.5, 1);
    let mut rng = stream(0, 0);
    for episode in 0..3000 {
        sarsa_lambda_episode(&mut q, &mut traces, &mut env, &mut rng, &mut Always, &cfg, episode, &mut |_| {}).unwrap();
    }
    let v1 = 1.0 / (1.0 - gamma * gamma);
    let v0 = gamma * v1;
    let at = |x: f64| q.eval_features(&q.features(&Observation::Vector(vec![x])).unwrap(), 0).unwrap();
    assert!((at(0.0) - v0).abs() < 1e-6, "{} vs {v0}", at(0.0));
    assert!((at(1.0) - v1).abs() < 1e-6, "{} vs {v1}", at(1.0));
}

fn mountain_car_spec(exploration: ExplorationConfig, episodes: usize) -> TrainingSpec {
    TrainingSpec {
        env: EnvSpec::mountain_car().with_max_steps(300),
        learner: LearnerSpec::SarsaLambda(sarsa(0.005, 0.99, 0.9, 3)),
        exploration,
        episodes,
        eval_every: None,
        eval_episodes: 1,
        stop_on_goal: false,
        max_total_steps: None,
    }
}

#[test]
fn zero_rewards_leave_zero_weights_untouched() {
    let spec = mountain_car_spec(ExplorationConfig::ez_greedy(0.5, DurationKind::default()), 4);
    let result = run_training(&spec, 1, 0).unwrap();
    assert!(result.logs.iter().all(|l| l.undiscounted_return == 0.0));
    let Representation::Linear(q) = result.representation else { panic!("linear") };
    assert!(q.weights().iter().all(|&w| w == 0.0));
}

#[test]
fn target_action_is_the_next_executed_action() {
    let mut rng = stream(4, 1);
    let mut env = EnvSpec::cartpole().with_max_steps(200).build(&mut rng).unwrap();
    let ObservationSpace::Box { low, high } = env.observation_space() else { panic!("box") };
    let basis = FourierBasis::new(2, low, high).unwrap();
    let mut q = LinearQ::random_normal(basis, 3, 0.01, &mut stream(4, 3)).unwrap();
    let mut traces = TraceVector::new(3, q.num_features());
    let mut explorer =
        Explorer::new(&ExplorationConfig::ez_greedy(0.3, DurationKind::default()), stream(4, 2)).unwrap();
    let cfg = sarsa(0.01, 0.99, 0.7, 2);
    for episode in 0..3 {
        let mut events = Vec::new();
        sarsa_lambda_episode(&mut q, &mut traces, env.as_mut(), &mut rng, &mut explorer, &cfg, episode, &mut |e| {
            events.push(e.clone())
        })
        .unwrap();
        assert_eq!(events.len(), 200);
        for pair in events.windows(2) {
            assert_eq!(pair[0].target_action, Some(pair[1].action));
        }
    }
}

#[test]
fn greedy_branch_reads_values_changed_mid_episode() {
    let mut rng = stream(0, 1);
    let mut env = EnvSpec::grid_world(7, 7).with_max_steps(20).build(&mut rng).unwrap();
    let states = env.tabular().unwrap().num_states();
    let mut q = TabularQ::new(states, 4, 0.0);
    let mut config = ExplorationConfig::ez_greedy(0.0, DurationKind::default());
    config.tie_break = TieBreak::First;
    let mut explorer = Explorer::new(&config, stream(0, 2)).unwrap();
    let cfg = QLearningConfig { alpha: 0.1, gamma: 0.99, initial_value: 0.0 };
    let mut actions = Vec::new();
    q_learning_episode(env.as_mut(), &mut rng, &mut q, &mut explorer, &cfg, 0, &mut |event, q| {
        actions.push(event.action);
        if event.step == 3 {
            for s in 0..states {
                q.set(s, 3, 5.0).unwrap();
            }
        }
    })
    .unwrap();
    assert_eq!(&actions[..4], &[0, 0, 0, 0]);
    assert_eq!(actions[4], 3);
}

#[test]
fn goal_trajectory_replays_make_the_greedy_policy_reach_the_goal() {
    let size = 8;
    let mut rng = stream(9, 1);
    let mut env = EnvSpec::deep_sea(size).build(&mut rng).unwrap();
    let states = env.tabular().unwrap().num_states();
    let mut q = TabularQ::new(states, 2, 0.0);
    let cfg = QLearningConfig { alpha: 1.0, gamma: 0.99, initial_value: 0.0 };
    let mut explorer = Explorer::new(&ExplorationConfig::ez_greedy(1.0, DurationKind::default()), stream(9, 2)).unwrap();
    let mut path: Vec<(usize, usize, f64, usize, bool)> = Vec::new();
    for episode in 0.. {
        let mut transitions = Vec::new();
        let mut state = DeepSea::state_id(0, 0);
        let log = q_learning_episode(env.as_mut(), &mut rng, &mut q, &mut explorer, &cfg, episode, &mut |e, _| {
            transitions.push((state, e.action, e.reward));
            let (row, col) = coords(state);
            state = next_cell(row, col, e.action);
        })
        .unwrap();
        if log.goal_reached {
            let mut s = DeepSea::state_id(0, 0);
            for (i, &(_, a, r)) in transitions.iter().enumerate() {
                let (row, col) = coords(s);
                let next = next_cell(row, col, a);
                path.push((s, a, r, next, i + 1 == transitions.len()));
                s = next;
            }
            break;
        }
        assert!(episode < 200_000, "goal never reached");
    }
    // Each replay of the goal trajectory pushes its value back by one step.
    for _ in 0..size {
        for &(s, a, r, next, done) in &path {
            q_learning_update(&mut q, s, a, r, next, done, &cfg).unwrap();
        }
    }
    let log = greedy_rollout(env.as_mut(), &mut rng, &q, 0.99, &mut stream(0, 5)).unwrap();
    assert!(log.goal_reached);
    assert!((log.undiscounted_return - 0.99).abs() < 1e-12);
}

/// Row/column of a deterministic DeepSea state id.
fn coords(state: usize) -> (usize, usize) {
    let mut row = 0;
    while (row + 1) * (row + 2) / 2 <= state {
        row += 1;
    }
    (row, state - row * (row + 1) / 2)
}

/// Action 1 moves down-right in the deterministic layout.
fn next_cell(row: usize, col: usize, action: usize) -> usize {
    let col = if action == 1 { (col + 1).min(row + 1) } else { col };
    DeepSea::state_id(row + 1, col)
}

#[test]
fn training_is_deterministic_per_seed_and_trial() {
    let spec = mountain_car_spec(ExplorationConfig::ez_greedy(0.2, DurationKind::default()), 3);
    let a = run_training(&spec, 3, 1).unwrap();
    let b = run_training(&spec, 3, 1).unwrap();
    assert_eq!(a.logs, b.logs);
    let grid = TrainingSpec {
        env: EnvSpec::grid_world(9, 9).with_max_steps(200),
        learner: LearnerSpec::QLearning(QLearningConfig { alpha: 0.1, gamma: 0.99, initial_value: 0.0 }),
        exploration: ExplorationConfig::ez_greedy(0.1, DurationKind::default()),
        episodes: 50,
        eval_every: Some(10),
        eval_episodes: 2,
        stop_on_goal: false,
        max_total_steps: None,
    };
    let a = run_training(&grid, 3, 1).unwrap();
    let b = run_training(&grid, 3, 1).unwrap();
    assert_eq!(a.logs, b.logs);
    assert_eq!(a.evals, b.evals);
    assert_eq!(a.evals.len(), 5);
    assert_ne!(run_training(&grid, 3, 2).unwrap().logs, a.logs);
}

#[test]
fn diverging_weights_abort_the_trial() {
    let spec = TrainingSpec {
        learner: LearnerSpec::SarsaLambda(SarsaLambdaConfig { weight_init_variance: 1.0, ..sarsa(1e300, 0.99, 0.9, 3) }),
        ..mountain_car_spec(ExplorationConfig::eps_greedy(0.1), 5)
    };
    assert!(matches!(run_training(&spec, 0, 0), Err(ezgreedy::Error::Diverged { .. })));
}
