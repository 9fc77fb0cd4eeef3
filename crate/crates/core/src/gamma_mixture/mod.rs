//! Mixtures of gamma densities, `f(y) = Σ_k π_k Ga(y; a_k, b_k)`.
//!
//! `a_k` is a shape and `b_k` a scale in mm, so each component density is
//! proportional to `y^(a - 1) e^(-y / b)`.

mod map;

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::numerics::special::{log_gamma_unchecked, reg_lower_unchecked};
use crate::numerics::{brent_root, RngState};

pub use map::{fit_map, MapFit, MapOptions};

/// Tolerance on `Σ π_k = 1` accepted by [`GammaMixtureParams::new`].
const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaMixtureParams {
    pub weights: Vec<f64>,
    pub shapes: Vec<f64>,
    /// Component scales, mm.
    pub scales: Vec<f64>,
}

impl GammaMixtureParams {
    /// Validates lengths, `a_k, b_k > 0`, and that the weights form a
    /// probability vector. A single component is accepted.
    pub fn new(weights: Vec<f64>, shapes: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || shapes.len() != k || scales.len() != k {
            return Err(Error::InvalidParams("weights, shapes and scales need one equal, nonzero length".into()));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParams("weights must lie in [0, 1]".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParams("weights must sum to 1".into()));
        }
        if shapes.iter().chain(&scales).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParams("shapes and scales must be finite and > 0".into()));
        }
        Ok(Self { weights, shapes, scales })
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// `ln f(y)` by log-sum-exp over components.
    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(domain("mixture log_pdf requires y > 0"));
        }
        Ok(LogDensity::new(self).eval(y, libm::log(y)))
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.log_pdf(y).map(libm::exp)
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(domain("mixture cdf requires y >= 0"));
        }
        Ok(self.cdf_unchecked(y))
    }

    fn cdf_unchecked(&self, y: f64) -> f64 {
        let mut total = 0.0;
        for ((w, a), b) in self.weights.iter().zip(&self.shapes).zip(&self.scales) {
            if *w > 0.0 {
                total += w * reg_lower_unchecked(*a, y / b);
            }
        }
        total.min(1.0)
    }

    /// Mean `Σ π_k a_k b_k`.
    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.shapes).zip(&self.scales).map(|((w, a), b)| w * a * b).sum()
    }

    /// Inverse CDF by Brent's method on `[0, hi]`, `hi` doubled until it
    /// brackets `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("quantile level must lie in (0, 1)"));
        }
        let top_mean = self.shapes.iter().zip(&self.scales).map(|(a, b)| a * b).fold(0.0, f64::max);
        let top_spread = self.shapes.iter().zip(&self.scales).map(|(a, b)| b * libm::sqrt(*a)).fold(0.0, f64::max);
        let mut hi = top_mean + 10.0 * top_spread;
        while self.cdf_unchecked(hi) <= p {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(domain("quantile bracket overflowed"));
            }
        }
        brent_root(|y| self.cdf_unchecked(y) - p, 0.0, hi, 0.0)
    }

    /// `n` inverse-CDF draws.
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<Vec<f64>> {
        (0..n).map(|_| self.quantile(rng.uniform())).collect()
    }

    /// The same mixture with components ordered by mean `a_k b_k` ascending.
    pub fn sorted_by_mean(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.components()).collect();
        idx.sort_by(|&i, &j| (self.shapes[i] * self.scales[i]).total_cmp(&(self.shapes[j] * self.scales[j])));
        Self {
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            shapes: idx.iter().map(|&i| self.shapes[i]).collect(),
            scales: idx.iter().map(|&i| self.scales[i]).collect(),
        }
    }
}

/// Per-component constants `ln π - ln Γ(a) - a ln b`, hoisted out of
/// likelihood loops.
pub(crate) struct LogDensity {
    consts: Vec<f64>,
    shape_minus_one: Vec<f64>,
    inv_scale: Vec<f64>,
}

impl LogDensity {
    pub(crate) fn new(p: &GammaMixtureParams) -> Self {
        let mut consts = Vec::with_capacity(p.components());
        let mut shape_minus_one = Vec::with_capacity(p.components());
        let mut inv_scale = Vec::with_capacity(p.components());
        for ((w, a), b) in p.weights.iter().zip(&p.shapes).zip(&p.scales) {
            let c = if *w > 0.0 {
                libm::log(*w) - log_gamma_unchecked(*a) - a * libm::log(*b)
            } else {
                f64::NEG_INFINITY
            };
            consts.push(c);
            shape_minus_one.push(a - 1.0);
            inv_scale.push(1.0 / b);
        }
        Self { consts, shape_minus_one, inv_scale }
    }

    /// `ln f(y)` given `ln y`.
    #[inline]
    pub(crate) fn eval(&self, y: f64, log_y: f64) -> f64 {
        let term = |i: usize| self.consts[i] + self.shape_minus_one[i] * log_y - y * self.inv_scale[i];
        let k = self.consts.len();
        let top = (0..k).map(term).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY || top.is_nan() {
            return top;
        }
        let sum: f64 = (0..k).map(|i| libm::exp(term(i) - top)).sum();
        top + libm::log(sum)
    }
}

/// Hyperparameters of the Damsleth conjugate prior:
/// `b ~ IG(u, v)` and `p(a | b) ∝ rho^(a - 1) / (b^(a q) Γ(a)^r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DamslethHyper {
    pub u: f64,
    pub v: f64,
    pub rho: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for DamslethHyper {
    fn default() -> Self {
        Self { u: 1.1, v: 2.0, rho: 1.0, q: 1.0, r: 1.0 }
    }
}

impl DamslethHyper {
    pub fn validate(&self) -> Result<()> {
        if [self.u, self.v, self.rho, self.q, self.r].iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(domain("prior hyperparameters must be finite and > 0"));
        }
        Ok(())
    }

    /// Log prior density of one component `(a, b)`, up to the constant of
    /// `p(a | b)`.
    pub fn log_prior(&self, a: f64, b: f64) -> f64 {
        let ln_b = libm::log(b);
        let log_ig = self.u * libm::log(self.v) - log_gamma_unchecked(self.u) - (self.u + 1.0) * ln_b - self.v / b;
        log_ig + (a - 1.0) * libm::log(self.rho) - a * self.q * ln_b - self.r * log_gamma_unchecked(a)
    }
}

/// `Σ_i ln f(y_i) + Σ_k ln p(a_k, b_k)`, with a flat prior on the weights.
pub fn log_posterior(data: &[f64], params: &GammaMixtureParams, hyper: &DamslethHyper) -> Result<f64> {
    hyper.validate()?;
    let density = LogDensity::new(params);
    let mut total = 0.0;
    for &y in data {
        if !(y > 0.0 && y.is_finite()) {
            return Err(domain("observations must be finite and > 0"));
        }
        total += density.eval(y, libm::log(y));
    }
    for (a, b) in params.shapes.iter().zip(&params.scales) {
        total += hyper.log_prior(*a, *b);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::LN_2;

    fn mix(w: &[f64], a: &[f64], b: &[f64]) -> GammaMixtureParams {
        GammaMixtureParams::new(w.to_vec(), a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn exponential_intercept() {
        let m = mix(&[1.0, 0.0], &[1.0, 3.0], &[2.0, 1.0]);
        assert!((m.log_pdf(1e-12).unwrap() + LN_2).abs() < 1e-9);
    }

    #[test]
    fn duplicate_components_collapse() {
        let m = mix(&[0.5, 0.5], &[2.0, 2.0], &[1.0, 1.0]);
        assert!((m.log_pdf(1.0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cdf_examples() {
        let single = mix(&[1.0], &[1.0], &[2.0]);
        assert_eq!(single.cdf(0.0).unwrap(), 0.0);
        assert!((single.cdf(2.0 * LN_2).unwrap() - 0.5).abs() < 1e-14);
        // 0.5(1 - e^-1) + 0.5(1 - e^(-1/3))
        let m = mix(&[0.5, 0.5], &[1.0, 1.0], &[1.0, 3.0]);
        assert!((m.cdf(1.0).unwrap() - 0.457_794_624_127_384).abs() < 1e-14);
    }

    #[test]
    fn quantile_examples() {
        let single = mix(&[1.0], &[1.0], &[2.0]);
        assert!((single.quantile(0.5).unwrap() - 2.0 * LN_2).abs() < 1e-12);
        let m = mix(&[0.5, 0.5], &[1.0, 1.0], &[1.0, 3.0]);
        assert!((m.quantile(0.457_794_624_127_384).unwrap() - 1.0).abs() < 1e-8);
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(GammaMixtureParams::new(vec![0.5, 0.4], vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(GammaMixtureParams::new(vec![0.5, 0.5], vec![1.0], vec![1.0, 1.0]).is_err());
        assert!(GammaMixtureParams::new(vec![0.5, 0.5], vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GammaMixtureParams::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn prior_only_posterior() {
        // per component: 1.1 ln 2 - ln Γ(1.1) - 2.1·0 - 2 + 0 - 0 - 0
        let m = mix(&[0.5, 0.5], &[1.0, 1.0], &[1.0, 1.0]);
        let v = log_posterior(&[], &m, &DamslethHyper::default()).unwrap();
        assert!((v - 2.0 * -1.187_665_660_124_220_3).abs() < 1e-13, "{v}");
    }

    #[test]
    fn sorting_by_mean() {
        let m = mix(&[0.2, 0.8], &[4.0, 1.0], &[2.0, 1.0]).sorted_by_mean();
        assert_eq!(m.weights, vec![0.8, 0.2]);
        assert_eq!(m.shapes, vec![1.0, 4.0]);
    }
}
