use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::explore::epsilon_greedy_select;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub epsilon: f64,
    pub num_actions: usize,
    pub k: usize,
    pub samples: u64,
    /// The designated sequence; never contains the greedy action 0.
    pub sequence: Vec<usize>,
    pub analytic: f64,
    pub hits: u64,
    pub empirical: f64,
    /// Binomial standard error at the analytic probability.
    pub std_error: f64,
    pub relative_error: f64,
    /// `(empirical − analytic) / std_error`.
    pub z_score: f64,
}

/// Frequency of one fixed length-`k` exploratory sequence under standard
/// ε-greedy, against `(ε/|A|)^k`.
///
/// The greedy action is 0 (a strict maximum), and the designated sequence
/// cycles through the other actions, so each of its steps can only come from
/// the exploratory branch.
pub fn sequence_probability_check<R: Rng + ?Sized>(
    epsilon: f64,
    num_actions: usize,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<SequenceReport> {
    if !(0.0..=1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(invalid(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    if num_actions < 2 {
        return Err(invalid("need at least two actions so the sequence can avoid the greedy one"));
    }
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let analytic = (epsilon / num_actions as f64).powi(k as i32);
    if analytic * (samples as f64) < 100.0 {
        return Err(Error::InsufficientSamples(format!(
            "expected count {:.3} < 100 for k = {k}; raise samples above {:.0}",
            analytic * samples as f64,
            (100.0 / analytic).ceil()
        )));
    }
    let sequence: Vec<usize> = (0..k).map(|i| 1 + i % (num_actions - 1)).collect();
    let mut q_row = vec![0.0; num_actions];
    q_row[0] = 1.0;
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut matched = true;
        for &want in &sequence {
            // Every step is drawn even after a mismatch so each sample costs the same.
            matched &= epsilon_greedy_select(epsilon, &q_row, rng)? == want;
        }
        hits += u64::from(matched);
    }
    let n = samples as f64;
    let empirical = hits as f64 / n;
    let std_error = (analytic * (1.0 - analytic) / n).sqrt();
    Ok(SequenceReport {
        epsilon,
        num_actions,
        k,
        samples,
        sequence,
        analytic,
        hits,
        empirical,
        std_error,
        relative_error: (empirical - analytic).abs() / analytic,
        z_score: (empirical - analytic) / std_error,
    })
}

/// Lengths of maximal runs of identical consecutive actions.
pub fn identical_action_runs(actions: &[usize]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut iter = actions.iter();
    let Some(mut prev) = iter.next() else {
        return runs;
    };
    let mut len = 1;
    for a in iter {
        if a == prev {
            len += 1;
        } else {
            runs.push(len);
            prev = a;
            len = 1;
        }
    }
    runs.push(len);
    runs
}
