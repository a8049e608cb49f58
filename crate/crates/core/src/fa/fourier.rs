use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Full (coupled) Fourier cosine basis: `φ_c(x) = cos(π c·x̄)` for every
/// `c ∈ {0..=order}^dims`, where `x̄` is the observation clipped to its bounds
/// and rescaled to `[0, 1]`.
///
/// Coefficient vectors are enumerated lexicographically with the first
/// dimension most significant, so feature 0 is the constant `c = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierBasis {
    order: usize,
    dims: usize,
    low: Vec<f64>,
    high: Vec<f64>,
    /// `num_features × dims`, row-major.
    coeffs: Vec<u16>,
    lr_scales: Vec<f64>,
}

impl FourierBasis {
    pub fn new(order: usize, low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        let dims = low.len();
        if dims == 0 || high.len() != dims {
            return Err(invalid("bounds must be non-empty and of equal length"));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l.is_finite() && h.is_finite() && h > l)) {
            return Err(invalid("each bound needs finite low < high"));
        }
        let base = order + 1;
        let count = base
            .checked_pow(dims as u32)
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| invalid(format!("order {order} over {dims} dims is too many features")))?;
        let mut coeffs = vec![0u16; count * dims];
        let mut lr_scales = Vec::with_capacity(count);
        for f in 0..count {
            let mut rest = f;
            for d in (0..dims).rev() {
                coeffs[f * dims + d] = (rest % base) as u16;
                rest /= base;
            }
            let norm = coeffs[f * dims..(f + 1) * dims].iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
            lr_scales.push(if norm == 0.0 { 1.0 } else { norm });
        }
        Ok(Self { order, dims, low, high, coeffs, lr_scales })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn num_features(&self) -> usize {
        self.lr_scales.len()
    }

    pub fn coefficients(&self, feature: usize) -> &[u16] {
        &self.coeffs[feature * self.dims..(feature + 1) * self.dims]
    }

    /// Learning-rate divisors `‖c‖₂`, with 1 for the constant feature.
    pub fn lr_scales(&self) -> &[f64] {
        &self.lr_scales
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.low, &self.high)
    }

    /// Observation clipped to the bounds and mapped to `[0, 1]^dims`.
    pub fn normalize(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: observation.len() });
        }
        Ok(observation
            .iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(&x, (&l, &h))| (x.clamp(l, h) - l) / (h - l))
            .collect())
    }

    pub fn features(&self, observation: &[f64]) -> Result<Vec<f64>> {
        let (mut out, mut scratch) = (Vec::new(), Vec::new());
        self.features_into(observation, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Writes all features into `out`, using `scratch` for imaginary parts.
    ///
    /// Evaluated as the real part of `∏_d exp(iπ c_d x̄_d)`, expanding one
    /// dimension at a time, which needs one complex multiply per feature
    /// instead of a dot product and a cosine.
    pub fn features_into(&self, observation: &[f64], out: &mut Vec<f64>, scratch: &mut Vec<f64>) -> Result<()> {
        let xbar = self.normalize(observation)?;
        let base = self.order + 1;
        let n = self.num_features();
        // Every entry is overwritten below; only the length matters.
        out.resize(n, 0.0);
        scratch.resize(n / (self.order + 1), 0.0);
        let (re, im) = (out.as_mut_slice(), scratch.as_mut_slice());
        re[0] = 1.0;
        im[0] = 0.0;

        let mut zr = vec![0.0; base];
        let mut zi = vec![0.0; base];
        let mut len = 1;
        for (d, &x) in xbar.iter().enumerate() {
            for c in 0..base {
                let (s, co) = (PI * c as f64 * x).sin_cos();
                zr[c] = co;
                zi[c] = s;
            }
            // Backwards so that source entry k is read before block k overwrites it.
            if d + 1 == self.dims {
                for k in (0..len).rev() {
                    let (ar, ai) = (re[k], im[k]);
                    for ((r, &cr), &ci) in re[k * base..(k + 1) * base].iter_mut().zip(&zr).zip(&zi) {
                        *r = ar * cr - ai * ci;
                    }
                }
            } else {
                for k in (0..len).rev() {
                    let (ar, ai) = (re[k], im[k]);
                    let dst = k * base..(k + 1) * base;
                    for (((r, i), &cr), &ci) in re[dst.clone()].iter_mut().zip(&mut im[dst]).zip(&zr).zip(&zi) {
                        *r = ar * cr - ai * ci;
                        *i = ar * ci + ai * cr;
                    }
                }
            }
            len *= base;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(basis: &FourierBasis, x: &[f64]) -> Vec<f64> {
        let xbar = basis.normalize(x).unwrap();
        (0..basis.num_features())
            .map(|f| {
                let dot: f64 = basis.coefficients(f).iter().zip(&xbar).map(|(&c, &v)| c as f64 * v).sum();
                (PI * dot).cos()
            })
            .collect()
    }

    #[test]
    fn order_one_at_bounds() {
        let b = FourierBasis::new(1, vec![-2.0], vec![3.0]).unwrap();
        assert_eq!(b.features(&[-2.0]).unwrap(), vec![1.0, 1.0]);
        let hi = b.features(&[3.0]).unwrap();
        assert_eq!(hi[0], 1.0);
        assert!((hi[1] + 1.0).abs() < 1e-15);
        // Clipped beyond the bound.
        assert!((b.features(&[10.0]).unwrap()[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_two_in_two_dims() {
        let b = FourierBasis::new(2, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let phi = b.features(&[0.5, 0.25]).unwrap();
        assert_eq!(phi.len(), 9);
        // c = (2, 1) sits at index 2*3 + 1.
        assert_eq!(b.coefficients(7), &[2, 1]);
        assert!((phi[7] - (1.25 * PI).cos()).abs() < 1e-14);
        assert!((phi[7] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        for (fast, slow) in phi.iter().zip(naive(&b, &[0.5, 0.25])) {
            assert!((fast - slow).abs() < 1e-14);
        }
    }

    #[test]
    fn fast_matches_naive_in_five_dims() {
        let b = FourierBasis::new(3, vec![-1.0; 5], vec![1.0; 5]).unwrap();
        let x = [0.3, -0.7, 0.9, 0.05, -0.2];
        let fast = b.features(&x).unwrap();
        for (f, s) in fast.iter().zip(naive(&b, &x)) {
            assert!((f - s).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_and_scales() {
        let b = FourierBasis::new(5, vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert_eq!(b.num_features(), 36);
        assert_eq!(b.lr_scales()[0], 1.0);
        assert!((b.lr_scales()[6 + 1] - 2f64.sqrt()).abs() < 1e-15);
        let b = FourierBasis::new(7, vec![0.0; 5], vec![1.0; 5]).unwrap();
        assert_eq!(b.num_features(), 32_768);
    }

    #[test]
    fn dimension_mismatch() {
        let b = FourierBasis::new(1, vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(matches!(b.features(&[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(FourierBasis::new(1, vec![0.0], vec![0.0]).is_err());
    }
}
