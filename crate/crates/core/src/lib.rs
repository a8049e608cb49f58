//! Temporally-extended ε-greedy exploration.
//!
//! The crate is organised the way an experiment flows:
//!
//! * [`duration`], [`option`] and [`explore`] hold the duration laws, the
//!   action-repeat options and the ε-greedy / εz-greedy selectors.
//! * [`env`] is the environment suite (chain, DeepSea, grid worlds,
//!   MountainCar, CartPole swing-up).
//! * [`fa`] holds the tabular and Fourier-linear action-value representations.
//! * [`learners`] runs Q-learning and SARSA(λ) against an environment.
//! * [`analysis`] computes first-visit maps, cover times, reachability-based
//!   coverage and sequence-probability checks.
//!
//! Every stochastic component draws from a [`rng::Rng64`] stream derived from
//! an experiment seed and a trial index, so results are reproducible per
//! `(seed, trial)` independently of scheduling.

pub mod analysis;
pub mod duration;
pub mod env;
pub mod error;
pub mod explore;
pub mod fa;
pub mod learners;
pub mod option;
pub mod rng;
pub mod stats;

pub use duration::{DurationDistribution, DurationKind};
pub use error::{Error, Result};
pub use explore::{ExplorationConfig, Explorer, PolicyKind, TieBreak};
pub use rng::Rng64;
