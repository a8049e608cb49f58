//! Small statistics toolkit used by the analysis and acceptance checks.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

use crate::error::{invalid, Result};

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub bins: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Chi-square goodness of fit of `observed` counts against probabilities
/// `expected_probs` (same indexing).
///
/// Adjacent cells are merged left to right until each bin expects at least
/// `min_expected` counts; a short remainder is folded into the last bin.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != expected_probs.len() {
        return Err(invalid("observed and expected tables differ in length"));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(invalid("no observations"));
    }
    let n = total as f64;
    let mass: f64 = expected_probs.iter().sum();

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected_probs) {
        if p == 0.0 && o > 0 {
            // Impossible outcome observed: the fit fails outright.
            return Ok(ChiSquareTest { statistic: f64::INFINITY, degrees_of_freedom: 1, p_value: 0.0, bins: 0 });
        }
        o_acc += o as f64;
        e_acc += p / mass * n;
        if e_acc >= min_expected {
            bins.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => bins.push((o_acc, e_acc)),
        }
    }
    if bins.len() < 2 {
        return Ok(ChiSquareTest { statistic: 0.0, degrees_of_freedom: 0, p_value: 1.0, bins: bins.len() });
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareTest { statistic, degrees_of_freedom: dof, p_value, bins: bins.len() })
}

/// Chi-square test of homogeneity between two count tables over the same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(invalid("count tables differ in length"));
    }
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("no observations"));
    }
    let mut statistic = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let pooled = (x + y) as f64;
        if pooled == 0.0 {
            continue;
        }
        cells += 1;
        let ea = pooled * na / (na + nb);
        let eb = pooled * nb / (na + nb);
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cells < 2 {
        return Ok(ChiSquareTest { statistic: 0.0, degrees_of_freedom: 0, p_value: 1.0, bins: cells });
    }
    let dof = cells - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareTest { statistic, degrees_of_freedom: dof, p_value, bins: cells })
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over `sqrt(n)`).
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Median of values that may be "infinite" (`None`, e.g. not covered within
/// budget). Returns `None` when fewer than half of the values are finite in
/// the sense that the middle order statistic is infinite.
pub fn median_with_censoring(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut finite: Vec<u64> = values.iter().flatten().copied().collect();
    finite.sort_unstable();
    let n = values.len();
    // Censored values sort after every finite one.
    let at = |i: usize| finite.get(i).map(|&v| v as f64);
    if n % 2 == 1 {
        at(n / 2)
    } else {
        Some((at(n / 2 - 1)? + at(n / 2)?) / 2.0)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// One-sided sign test for paired samples: p-value of seeing at least `wins`
/// positive differences among the non-tied pairs when each sign is a fair coin.
#[derive(Clone, Debug, PartialEq)]
pub struct SignTest {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub p_value: f64,
}

pub fn sign_test(a: &[f64], b: &[f64]) -> Result<SignTest> {
    if a.len() != b.len() {
        return Err(invalid("paired samples differ in length"));
    }
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count() as u64;
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count() as u64;
    let ties = a.len() as u64 - wins - losses;
    let n = wins + losses;
    let p_value = if n == 0 {
        1.0
    } else if wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, n).map_err(|e| invalid(e.to_string()))?;
        // P(X >= wins) = 1 - P(X <= wins - 1)
        bin.sf(wins - 1)
    };
    Ok(SignTest { wins, losses, ties, p_value })
}
