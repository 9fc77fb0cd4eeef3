//! Empirical quantiles and probability weighted moments of a sample.
//!
//! Quantiles use the type-7 convention: linear interpolation between order
//! statistics at rank `h = (n - 1) p + 1`. Every reported log-ratio depends
//! on this choice, so it is the single definition used across the crate
//! (including the quartiles behind the U/O/N classification).

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

/// A sample sorted ascending, with every value finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(domain("sample values must be finite and > 0"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Type-7 quantile. Requires `0 < p < 1` and at least two values.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.values.len() });
        }
        type7_quantile(&self.values, p)
    }

    /// Unbiased estimator of `E[X F(X)^j]`:
    /// `(1/n) Σ C(i-1, j) / C(n-1, j) x_(i)`.
    pub fn pwm(&self, j: usize) -> Result<f64> {
        let n = self.values.len();
        if n <= j {
            return Err(Error::InsufficientData { needed: j + 1, got: n });
        }
        let nf = n as f64;
        let mut total = 0.0;
        for (idx, x) in self.values.iter().enumerate() {
            // weight = C(i-1, j) / C(n-1, j) with i = idx + 1
            let mut w = 1.0;
            for k in 0..j {
                w *= (idx as f64 - k as f64) / (nf - 1.0 - k as f64);
            }
            total += w * x;
        }
        Ok(total / nf)
    }
}

/// Type-7 quantile of an ascending slice (length ≥ 1).
///
/// Also used for the D-value quartiles, which may be negative; a single value
/// is its own quantile.
pub(crate) fn type7_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("quantile level must lie in (0, 1)"));
    }
    let n = sorted.len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if n == 1 {
        return Ok(sorted[0]);
    }
    let h = (n as f64 - 1.0) * p + 1.0;
    let lo = libm::floor(h);
    let frac = h - lo;
    let i = lo as usize; // 1-based rank, 1 <= i <= n
    let x_lo = sorted[i - 1];
    if i >= n {
        return Ok(x_lo);
    }
    let x_hi = sorted[i];
    Ok(x_lo + frac * (x_hi - x_lo))
}

/// Type-7 quantile of a sample with at least two values.
pub fn empirical_quantile(sample: &SortedSample, p: f64) -> Result<f64> {
    sample.quantile(p)
}

/// Unbiased probability weighted moment of order `j`.
pub fn empirical_pwm(sample: &SortedSample, j: usize) -> Result<f64> {
    sample.pwm(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one_to_hundred() -> SortedSample {
        SortedSample::new((1..=100).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn type7_rank_examples() {
        let s = one_to_hundred();
        assert_eq!(s.quantile(0.5).unwrap(), 50.5);
        // h = 99 * 0.99 + 1 = 99.01
        assert!((s.quantile(0.99).unwrap() - 99.01).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_has_constant_quantiles() {
        let s = SortedSample::new(vec![3.0; 17]).unwrap();
        for p in [0.01, 0.3, 0.5, 0.99] {
            assert_eq!(s.quantile(p).unwrap(), 3.0);
        }
    }

    #[test]
    fn quantile_errors() {
        let s = one_to_hundred();
        assert!(s.quantile(0.0).is_err());
        assert!(s.quantile(1.0).is_err());
        let single = SortedSample::new(vec![2.0]).unwrap();
        assert!(single.quantile(0.5).is_err());
    }

    #[test]
    fn pwm_hand_values() {
        let s = SortedSample::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.pwm(0).unwrap(), 2.0);
        // (1/3)[0 + 2·(1/2) + 3·1] = 4/3
        assert!((s.pwm(1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        // (1/3)[0 + 0 + 3·1] = 1
        assert!((s.pwm(2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pwm_order_must_be_below_n() {
        let s = SortedSample::new(vec![1.0, 2.0]).unwrap();
        assert!(s.pwm(2).is_err());
        assert!(s.pwm(1).is_ok());
    }

    #[test]
    fn rejects_nonpositive_values() {
        assert!(SortedSample::new(vec![1.0, 0.0]).is_err());
        assert!(SortedSample::new(vec![1.0, f64::NAN]).is_err());
        assert!(matches!(SortedSample::new(vec![]), Err(Error::EmptyData)));
    }
}
