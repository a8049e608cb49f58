//! Truncated duration laws for action-repeat options.
//!
//! A [`DurationDistribution`] is a discrete law over repeat lengths
//! `n ∈ {1, …, cap}`. The pmf is tabulated once and sampled by inverse-CDF
//! lookup (binary search over the cumulative table), which is exact with
//! respect to the truncated law and never loops.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default truncation of the duration support.
pub const DEFAULT_CAP: usize = 10_000;
/// Short-cap preset used by the Rainbow-style agents.
pub const SHORT_CAP: usize = 100;
/// Default zeta exponent.
pub const DEFAULT_MU: f64 = 2.0;

/// Family and parameter of a duration law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationKind {
    /// `z(n) ∝ n^(-mu)`.
    Zeta { mu: f64 },
    /// `z(n) = 1/N` for `n ≤ N`.
    Uniform { n: usize },
    /// `z(n) ∝ lambda^(n-1)`.
    Geometric { lambda: f64 },
    /// All mass on a single length.
    Fixed { n: usize },
}

impl Default for DurationKind {
    fn default() -> Self {
        DurationKind::Zeta { mu: DEFAULT_MU }
    }
}

impl DurationKind {
    /// Short label used in file names and reports.
    pub fn label(&self) -> String {
        match self {
            DurationKind::Zeta { mu } => format!("zeta(mu={mu})"),
            DurationKind::Uniform { n } => format!("uniform(N={n})"),
            DurationKind::Geometric { lambda } => format!("geometric(lambda={lambda})"),
            DurationKind::Fixed { n } => format!("fixed({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DurationDistribution {
    kind: DurationKind,
    cap: usize,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl DurationDistribution {
    /// Builds the truncated law. Zeta exponents `mu ≤ 1` are rejected; use
    /// [`DurationDistribution::with_divergent`] to allow them.
    pub fn new(kind: DurationKind, cap: usize) -> Result<Self> {
        Self::build(kind, cap, false)
    }

    /// Like [`DurationDistribution::new`] but permits `0 < mu ≤ 1`, whose
    /// untruncated series diverges while the truncated pmf stays well-defined.
    pub fn with_divergent(kind: DurationKind, cap: usize) -> Result<Self> {
        Self::build(kind, cap, true)
    }

    pub fn build(kind: DurationKind, cap: usize, allow_divergent: bool) -> Result<Self> {
        if cap < 1 {
            return Err(invalid("duration cap must be at least 1"));
        }
        let weights: Vec<f64> = match kind {
            DurationKind::Zeta { mu } => {
                if !mu.is_finite() || mu <= 0.0 {
                    return Err(invalid(format!("zeta exponent must be > 0, got {mu}")));
                }
                if mu <= 1.0 && !allow_divergent {
                    return Err(invalid(format!(
                        "zeta exponent {mu} <= 1 diverges without truncation; enable allow_divergent"
                    )));
                }
                (1..=cap).map(|n| (n as f64).powf(-mu)).collect()
            }
            DurationKind::Uniform { n } => {
                if n < 1 {
                    return Err(invalid("uniform support N must be at least 1"));
                }
                (1..=cap).map(|k| if k <= n { 1.0 } else { 0.0 }).collect()
            }
            DurationKind::Geometric { lambda } => {
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(invalid(format!("geometric lambda must lie in (0,1), got {lambda}")));
                }
                let ln = lambda.ln();
                (1..=cap).map(|k| ((k - 1) as f64 * ln).exp()).collect()
            }
            DurationKind::Fixed { n } => {
                if n < 1 {
                    return Err(invalid("fixed duration must be at least 1"));
                }
                if n > cap {
                    return Err(invalid(format!("fixed duration {n} exceeds cap {cap}")));
                }
                (1..=cap).map(|k| if k == n { 1.0 } else { 0.0 }).collect()
            }
        };

        // Smallest terms first keeps the normalizer accurate for long tails.
        let total: f64 = weights.iter().rev().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(cap);
        let mut acc = 0.0;
        for p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        // Pin the last non-decreasing entry so every u in (0,1] maps inside the support.
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        for v in cdf.iter_mut().rev().skip(1) {
            if *v > 1.0 {
                *v = 1.0;
            }
        }
        Ok(Self { kind, cap, pmf, cdf })
    }

    pub fn kind(&self) -> DurationKind {
        self.kind
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Probability of repeat length `n` (zero outside `1..=cap`).
    pub fn pmf(&self, n: usize) -> f64 {
        if n == 0 || n > self.cap {
            0.0
        } else {
            self.pmf[n - 1]
        }
    }

    /// `P(N ≤ n)`.
    pub fn cdf(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.cdf[n.min(self.cap) - 1]
        }
    }

    /// `P(N ≥ n)`.
    pub fn tail(&self, n: usize) -> f64 {
        if n <= 1 {
            1.0
        } else {
            self.pmf.iter().skip(n - 1).rev().sum()
        }
    }

    pub fn pmf_table(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    /// Largest length with positive mass.
    pub fn max_support(&self) -> usize {
        self.pmf.iter().rposition(|&p| p > 0.0).map_or(0, |i| i + 1)
    }

    /// Lengths with positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.pmf.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i + 1)
    }

    /// Inverse-CDF lookup: the smallest `n` with `cdf(n) ≥ u`, for `u ∈ (0, 1]`.
    pub fn quantile(&self, u: f64) -> usize {
        let idx = self.cdf.partition_point(|&c| c < u);
        idx.min(self.cap - 1) + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        // (0, 1]: zero would land on a leading zero-mass entry.
        let u = 1.0 - rng.random::<f64>();
        self.quantile(u)
    }
}
