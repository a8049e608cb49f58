//! Exploration diagnostics that need no learning: first-visit maps, cover
//! times, exact reachability of state-action pairs under an option set, and
//! sequence-probability checks.

mod cover_time;
mod coverage;
mod first_visit;
mod policy;
mod sequence;

pub use cover_time::{cover_time, cover_time_trial, CoverTimeReport, CoverTimeSpec};
pub use coverage::{
    coverage_check, simulate_option_policy, CoverageResult, CoverageSpec, OptionSetSpec, DEFAULT_ROLLOUT_SEED,
};
pub use first_visit::{first_visit_map, first_visit_trial, FirstVisitGrid, FirstVisitLayout, FirstVisitSpec, Scale};
pub use policy::{rollout, GreedyPolicy, PolicyRunner, RolloutEvent};
pub use sequence::{identical_action_runs, sequence_probability_check, SequenceReport};
