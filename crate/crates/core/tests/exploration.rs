use ezgreedy::analysis::identical_action_runs;
use ezgreedy::duration::DEFAULT_CAP;
use ezgreedy::env::EnvSpec;
use ezgreedy::explore::Decision;
use ezgreedy::fa::TabularQ;
use ezgreedy::learners::{q_learning_episode, QLearningConfig};
use ezgreedy::rng::stream;
use ezgreedy::stats::{chi_square_gof, chi_square_two_sample};
use ezgreedy::{DurationDistribution, DurationKind, ExplorationConfig, Explorer};
use proptest::prelude::*;

fn kinds() -> impl Strategy<Value = DurationKind> {
    prop_oneof![
        (1.01f64..8.0).prop_map(|mu| DurationKind::Zeta { mu }),
        (1usize..200).prop_map(|n| DurationKind::Uniform { n }),
        (0.01f64..0.999).prop_map(|lambda| DurationKind::Geometric { lambda }),
        (1usize..50).prop_map(|n| DurationKind::Fixed { n }),
    ]
}

proptest! {
    #[test]
    fn pmf_and_cdf_are_proper(kind in kinds(), cap in 50usize..3000) {
        let d = DurationDistribution::new(kind, cap).unwrap();
        let pmf = d.pmf_table();
        prop_assert_eq!(pmf.len(), cap);
        prop_assert!(pmf.iter().all(|&p| p >= 0.0));
        prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let cdf = d.cdf_table();
        prop_assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((cdf[cap - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_matches_closed_form(kind in kinds(), cap in 50usize..500) {
        let d = DurationDistribution::new(kind, cap).unwrap();
        let raw: Vec<f64> = (1..=cap)
            .map(|n| match kind {
                DurationKind::Zeta { mu } => (n as f64).powf(-mu),
                DurationKind::Uniform { n: big } => f64::from(u8::from(n <= big)),
                DurationKind::Geometric { lambda } => lambda.powi(n as i32 - 1),
                DurationKind::Fixed { n: k } => f64::from(u8::from(n == k)),
            })
            .collect();
        let z: f64 = raw.iter().sum();
        for (n, r) in raw.iter().enumerate() {
            prop_assert!((d.pmf(n + 1) - r / z).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_stay_in_support(kind in kinds(), seed: u64) {
        let d = DurationDistribution::new(kind, 400).unwrap();
        let mut rng = stream(seed, 0);
        for _ in 0..200 {
            let n = d.sample(&mut rng);
            prop_assert!((1..=400).contains(&n));
            prop_assert!(d.pmf(n) > 0.0);
        }
    }
}

#[test]
fn inverse_cdf_lookup_of_small_zeta() {
    let d = DurationDistribution::new(DurationKind::Zeta { mu: 2.0 }, 2).unwrap();
    assert_eq!(d.quantile(0.5), 1);
    assert_eq!(d.quantile(0.8), 1);
    assert_eq!(d.quantile(0.81), 2);
}

fn actions(config: &ExplorationConfig, num_actions: usize, steps: usize, seed: u64) -> Vec<usize> {
    let mut explorer = Explorer::new(config, stream(seed, 2)).unwrap();
    let row = vec![0.0; num_actions];
    (0..steps).map(|_| explorer.select(&row).unwrap()).collect()
}

#[test]
fn fixed_durations_give_runs_in_multiples_of_k() {
    let config = ExplorationConfig::ez_greedy(1.0, DurationKind::Fixed { n: 5 });
    let acts = actions(&config, 4, 100_000, 1);
    let runs = identical_action_runs(&acts);
    let (last, body) = runs.split_last().unwrap();
    assert!(body.iter().all(|r| r % 5 == 0));
    assert!(*last <= 100_000);
}

#[test]
fn installed_options_repeat_exactly_n_times() {
    let config = ExplorationConfig::ez_greedy(0.3, DurationKind::Zeta { mu: 1.5 });
    let mut explorer = Explorer::new(&config, stream(8, 2)).unwrap();
    let row = [0.0, 1.0, 0.5];
    let mut owed: Option<(usize, usize)> = None;
    for _ in 0..200_000 {
        let a = explorer.select(&row).unwrap();
        match explorer.last_decision().unwrap() {
            Decision::StartOption { duration } => {
                assert!(owed.is_none(), "new option while one was active");
                owed = (duration > 1).then_some((a, duration - 1));
            }
            Decision::ContinueOption => {
                let (action, left) = owed.expect("continuation without an option");
                assert_eq!(a, action);
                owed = (left > 1).then_some((action, left - 1));
            }
            Decision::Greedy => {
                assert!(owed.is_none());
                assert_eq!(a, 1);
            }
        }
    }
}

#[test]
fn fraction_of_steps_inside_options_matches_renewal_identity() {
    for (eps, k) in [(0.3, 4usize), (0.05, 10), (0.6, 2)] {
        let config = ExplorationConfig::ez_greedy(eps, DurationKind::Fixed { n: k });
        let mut explorer = Explorer::new(&config, stream(3, 2)).unwrap();
        let steps = 400_000;
        let mut inside = 0u64;
        for _ in 0..steps {
            explorer.select(&[1.0, 0.0, 0.0]).unwrap();
            if explorer.last_decision() != Some(Decision::Greedy) {
                inside += 1;
            }
        }
        let mean = k as f64;
        let expected = eps * mean / (eps * mean + 1.0 - eps);
        let observed = inside as f64 / steps as f64;
        assert!((observed - expected).abs() < 0.01, "eps {eps} k {k}: {observed} vs {expected}");
    }
}

#[test]
fn fixed_one_is_epsilon_greedy() {
    let row = [0.2, 0.9, 0.1, 0.9];
    let count = |config: ExplorationConfig, seed| {
        let mut explorer = Explorer::new(&config, stream(seed, 2)).unwrap();
        let mut c = vec![0u64; row.len()];
        for _ in 0..100_000 {
            c[explorer.select(&row).unwrap()] += 1;
        }
        c
    };
    let ez = count(ExplorationConfig::ez_greedy(0.4, DurationKind::Fixed { n: 1 }), 1);
    let eps = count(ExplorationConfig::eps_greedy(0.4), 2);
    assert!(chi_square_two_sample(&ez, &eps).unwrap().passes(0.001));
    // 0.3 + 0.1 on each tied maximizer, 0.1 elsewhere.
    let expected = [0.1, 0.4, 0.1, 0.4];
    assert!(chi_square_gof(&eps, &expected, 5.0).unwrap().passes(0.001));
}

#[test]
fn uniform_exploration_frequencies() {
    let acts = actions(&ExplorationConfig::eps_greedy(1.0), 4, 100_000, 5);
    for a in 0..4 {
        let f = acts.iter().filter(|&&x| x == a).count() as f64 / 1e5;
        assert!((f - 0.25).abs() < 0.01);
    }
}

#[test]
fn zeta_run_lengths_follow_the_duration_law() {
    // With ε = 1 and |A| = 2 consecutive options can pick the same action and
    // merge, so runs are compared against options read from the decision log.
    let config = ExplorationConfig::ez_greedy(1.0, DurationKind::Zeta { mu: 2.0 });
    let mut explorer = Explorer::new(&config, stream(21, 2)).unwrap();
    let dist = DurationDistribution::new(DurationKind::Zeta { mu: 2.0 }, DEFAULT_CAP).unwrap();
    let mut counts = vec![0u64; DEFAULT_CAP];
    let mut current = 0usize;
    for _ in 0..500_000 {
        explorer.select(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        match explorer.last_decision().unwrap() {
            Decision::StartOption { .. } => {
                if current > 0 {
                    counts[current - 1] += 1;
                }
                current = 1;
            }
            _ => current += 1,
        }
    }
    let test = chi_square_gof(&counts, dist.pmf_table(), 5.0).unwrap();
    assert!(test.passes(0.001), "p = {}", test.p_value);
}

#[test]
fn options_never_cross_deep_sea_resets() {
    let mut rng = stream(2, 1);
    let mut env = EnvSpec::deep_sea(10).build(&mut rng).unwrap();
    let config = ExplorationConfig::ez_greedy(1.0, DurationKind::Zeta { mu: 2.0 });
    let mut explorer = Explorer::new(&config, stream(2, 2)).unwrap();
    let model_states = env.tabular().unwrap().num_states();
    let mut q = TabularQ::new(model_states, 2, 0.0);
    let cfg = QLearningConfig { alpha: 1.0, gamma: 0.99, initial_value: 0.0 };
    for episode in 0..10_000 {
        let mut first = None;
        q_learning_episode(env.as_mut(), &mut rng, &mut q, &mut explorer, &cfg, episode, &mut |event, _| {
            if event.step == 0 {
                first = Some(event.action);
            }
        })
        .unwrap();
        assert!(explorer.active_option().is_none());
        assert!(first.is_some());
    }
    // The first step of the next episode must start a fresh option.
    explorer.select(&[0.0, 0.0]).unwrap();
    assert!(matches!(explorer.last_decision(), Some(Decision::StartOption { .. })));
}

#[test]
fn episode_end_hands_control_back_to_the_sampling_branch() {
    let config = ExplorationConfig::ez_greedy(1.0, DurationKind::Fixed { n: 8 });
    let mut explorer = Explorer::new(&config, stream(0, 2)).unwrap();
    explorer.select(&[0.0, 0.0]).unwrap();
    assert_eq!(explorer.active_option().unwrap().remaining, 7);
    explorer.notify_episode_end();
    assert!(explorer.active_option().is_none());
    explorer.select(&[0.0, 0.0]).unwrap();
    assert_eq!(explorer.last_decision(), Some(Decision::StartOption { duration: 8 }));
    explorer.notify_episode_end();
    explorer.notify_episode_end();
}

#[test]
fn identical_seeds_give_identical_actions() {
    let config = ExplorationConfig::ez_greedy(0.2, DurationKind::default());
    assert_eq!(actions(&config, 5, 10_000, 77), actions(&config, 5, 10_000, 77));
    assert_ne!(actions(&config, 5, 10_000, 77), actions(&config, 5, 10_000, 78));
}
