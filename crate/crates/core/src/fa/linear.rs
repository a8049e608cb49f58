use std::io::Write;

use rand_distr::{Distribution, Normal};

use super::{ActionValue, FourierBasis};
use crate::env::Observation;
use crate::error::{invalid, Error, Result};
use crate::rng::Rng64;

/// `Q(x, a) = w_a · φ(x)` over a Fourier basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearQ {
    basis: FourierBasis,
    num_actions: usize,
    /// `num_actions × num_features`, row-major.
    weights: Vec<f64>,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Eight lanes let the compiler vectorise; the order is fixed so results
    // stay deterministic.
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

impl LinearQ {
    pub fn zeros(basis: FourierBasis, num_actions: usize) -> Self {
        let n = basis.num_features() * num_actions;
        Self { basis, num_actions, weights: vec![0.0; n] }
    }

    /// Weights drawn i.i.d. from a mean-zero normal with the given variance.
    pub fn random_normal(basis: FourierBasis, num_actions: usize, variance: f64, rng: &mut Rng64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(invalid(format!("weight variance must be finite and >= 0, got {variance}")));
        }
        let mut q = Self::zeros(basis, num_actions);
        if variance > 0.0 {
            let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| invalid(e.to_string()))?;
            for w in q.weights.iter_mut() {
                *w = normal.sample(rng);
            }
        }
        Ok(q)
    }

    pub fn basis(&self) -> &FourierBasis {
        &self.basis
    }

    pub fn num_features(&self) -> usize {
        self.basis.num_features()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn action_weights(&self, action: usize) -> Result<&[f64]> {
        if action >= self.num_actions {
            return Err(Error::ActionOutOfRange { action, num_actions: self.num_actions });
        }
        let f = self.num_features();
        Ok(&self.weights[action * f..(action + 1) * f])
    }

    pub fn action_weights_mut(&mut self, action: usize) -> Result<&mut [f64]> {
        if action >= self.num_actions {
            return Err(Error::ActionOutOfRange { action, num_actions: self.num_actions });
        }
        let f = self.num_features();
        Ok(&mut self.weights[action * f..(action + 1) * f])
    }

    pub fn features(&self, observation: &Observation) -> Result<Vec<f64>> {
        self.basis.features(observation.vector()?)
    }

    /// Value of one action given precomputed features.
    pub fn eval_features(&self, features: &[f64], action: usize) -> Result<f64> {
        Ok(dot(self.action_weights(action)?, features))
    }

    /// All action values given precomputed features (one feature pass shared by all actions).
    pub fn row_from_features(&self, features: &[f64], out: &mut Vec<f64>) {
        let f = self.num_features();
        out.clear();
        out.extend(self.weights.chunks_exact(f).map(|w| dot(w, features)));
    }

    /// `∂Q(x, a)/∂w_a`, which is just `φ(x)`; other rows have zero gradient.
    pub fn gradient(&self, observation: &Observation, action: usize) -> Result<Vec<f64>> {
        self.action_weights(action)?;
        self.features(observation)
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    /// One row per action: `action,w_0,…,w_{F-1}`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let f = self.num_features();
        write!(out, "action")?;
        for i in 0..f {
            write!(out, ",w{i}")?;
        }
        writeln!(out)?;
        for (a, row) in self.weights.chunks_exact(f).enumerate() {
            write!(out, "{a}")?;
            for w in row {
                write!(out, ",{w}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl ActionValue for LinearQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn q_eval(&self, observation: &Observation, action: usize) -> Result<f64> {
        let phi = self.features(observation)?;
        self.eval_features(&phi, action)
    }

    fn q_row(&self, observation: &Observation, out: &mut Vec<f64>) -> Result<()> {
        let phi = self.features(observation)?;
        self.row_from_features(&phi, out);
        Ok(())
    }
}
