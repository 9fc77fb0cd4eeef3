//! Extended generalized Pareto distribution `F(y) = H(y; sigma, xi)^kappa`.
//!
//! `H` is the generalized Pareto CDF with scale `sigma` (mm) and shape `xi`;
//! the power carrier `G(x) = x^kappa` lets a single family bend the lower
//! tail (through `kappa`) while keeping the GP upper tail (through `xi`).
//!
//! Shapes with `|xi| < 1e-8` are evaluated on the exponential branch.

mod fit;
mod pwm;

use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::numerics::RngState;

pub use fit::{
    fit_mle, fit_mle_censored, fit_pwm, fit_pwm_censored, fit_pwm_censored_from_moments,
    fit_pwm_from_moments, CensoringSpec, EgpdFit, EgpdFitOptions, MIN_OBSERVATIONS, PWM_RESIDUAL_TOL,
};
pub use pwm::{conditional_pwms, theoretical_pwm, PwmQuadrature};

/// Below this magnitude the shape is treated as exactly zero.
pub const XI_ZERO_BAND: f64 = 1e-8;
/// Lower edge of the shape fitting box.
pub const XI_MIN: f64 = -0.5;
/// Upper edge of the shape fitting box.
pub const XI_MAX: f64 = 0.95;

/// `(kappa, sigma, xi)` of the EGPD family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EgpdParams {
    pub kappa: f64,
    /// GP scale, mm.
    pub sigma: f64,
    pub xi: f64,
}

impl EgpdParams {
    /// Validates `kappa > 0`, `sigma > 0` and finiteness. The shape is not
    /// restricted to the fitting box here.
    pub fn new(kappa: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain("kappa must be finite and > 0"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("sigma must be finite and > 0"));
        }
        if !xi.is_finite() {
            return Err(domain("xi must be finite"));
        }
        Ok(Self { kappa, sigma, xi })
    }

    pub fn in_fitting_box(&self) -> bool {
        (XI_MIN..=XI_MAX).contains(&self.xi)
    }

    /// Right end of the support: `-sigma / xi` when `xi < 0`, otherwise `+inf`.
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < -XI_ZERO_BAND {
            -self.sigma / self.xi
        } else {
            f64::INFINITY
        }
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        let h = gp_cdf(y, self.sigma, self.xi)?;
        Ok(power_carrier(h, self.kappa))
    }

    /// `ln[kappa h(y) H(y)^(kappa - 1)]`, `-inf` outside the support.
    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(domain("log_pdf requires y > 0"));
        }
        Ok(DensityTerms::new(self).log_pdf(y))
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.log_pdf(y).map(libm::exp)
    }

    /// Inverse CDF for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("quantile level must lie in (0, 1)"));
        }
        Ok(self.quantile_unchecked(p, 1.0 - p))
    }

    /// Quantile at level `u` with `tail = 1 - u` supplied separately, so
    /// levels within rounding of 1 keep full relative precision.
    pub(crate) fn quantile_unchecked(&self, u: f64, tail: f64) -> f64 {
        // ln(1 - h) for h = u^(1/kappa), from whichever of u or 1 - u is
        // known accurately, and without rounding h away when it is tiny
        let log_u = if u < 0.5 { libm::log(u) } else { libm::log1p(-tail) };
        let log_h = log_u / self.kappa;
        let log_tail = if log_h < -core::f64::consts::LN_2 {
            libm::log1p(-libm::exp(log_h))
        } else {
            libm::log(-libm::expm1(log_h))
        };
        gp_quantile_from_log_tail(log_tail, self.sigma, self.xi)
    }

    /// `n` inverse-CDF draws.
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u = rng.uniform();
                self.quantile_unchecked(u, 1.0 - u)
            })
            .collect()
    }

    /// Probability weighted moment `E[Y F(Y)^j]` (mm).
    pub fn pwm(&self, j: usize) -> Result<f64> {
        theoretical_pwm(j, self)
    }
}

/// Generalized Pareto CDF `H(y; sigma, xi)`.
pub fn gp_cdf(y: f64, sigma: f64, xi: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(domain("gp_cdf requires y >= 0"));
    }
    if !(sigma > 0.0) {
        return Err(domain("gp_cdf requires sigma > 0"));
    }
    Ok((-libm::expm1(gp_log_survival(y, sigma, xi))).clamp(0.0, 1.0))
}

/// `ln(1 - H(y))`; `-inf` at or beyond the upper endpoint.
#[inline]
fn gp_log_survival(y: f64, sigma: f64, xi: f64) -> f64 {
    if xi.abs() < XI_ZERO_BAND {
        return -y / sigma;
    }
    let z = xi * y / sigma;
    if z <= -1.0 {
        return f64::NEG_INFINITY;
    }
    -libm::log1p(z) / xi
}

/// GP quantile at level `1 - tail`.
#[inline]
fn gp_quantile_from_log_tail(log_tail: f64, sigma: f64, xi: f64) -> f64 {
    if xi.abs() < XI_ZERO_BAND {
        -sigma * log_tail
    } else {
        sigma / xi * libm::expm1(-xi * log_tail)
    }
}

#[inline]
fn power_carrier(h: f64, kappa: f64) -> f64 {
    if h <= 0.0 {
        0.0
    } else {
        libm::exp(kappa * libm::log(h)).min(1.0)
    }
}

/// Parameter-only pieces of the log density, hoisted out of likelihood loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DensityTerms {
    log_kappa_minus_log_sigma: f64,
    kappa_minus_one: f64,
    one_plus_xi: f64,
    sigma: f64,
    xi: f64,
}

impl DensityTerms {
    pub(crate) fn new(p: &EgpdParams) -> Self {
        Self {
            log_kappa_minus_log_sigma: libm::log(p.kappa) - libm::log(p.sigma),
            kappa_minus_one: p.kappa - 1.0,
            one_plus_xi: 1.0 + p.xi,
            sigma: p.sigma,
            xi: p.xi,
        }
    }

    /// Log density at `y > 0`.
    #[inline]
    pub(crate) fn log_pdf(&self, y: f64) -> f64 {
        let log_s = gp_log_survival(y, self.sigma, self.xi);
        if log_s == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        // h(y) = S(y)^(1 + xi) / sigma
        let log_h_term = self.one_plus_xi * log_s;
        let log_cdf_h = libm::log(-libm::expm1(log_s));
        self.log_kappa_minus_log_sigma + log_h_term + self.kappa_minus_one * log_cdf_h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    fn p(kappa: f64, sigma: f64, xi: f64) -> EgpdParams {
        EgpdParams::new(kappa, sigma, xi).unwrap()
    }

    #[test]
    fn gp_cdf_examples() {
        assert_eq!(gp_cdf(0.0, 1.0, 0.3).unwrap(), 0.0);
        assert!((gp_cdf(2.0 * LN_2, 2.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((gp_cdf(2.0, 1.0, 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn quantile_keeps_precision_at_small_kappa() {
        // mpmath at 400 digits
        let e = p(0.0125, 6.5, -0.125);
        for (q, want) in [(0.01, 6.5e-160), (0.5, 5.3766739815946799e-24), (0.99, 3.7171832838704391)] {
            let got = e.quantile(q).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "{q}: {got}");
        }
    }

    #[test]
    fn gp_cdf_bounded_support() {
        // xi = -0.5, sigma = 1: endpoint at 2
        assert_eq!(gp_cdf(2.0, 1.0, -0.5).unwrap(), 1.0);
        assert_eq!(gp_cdf(7.0, 1.0, -0.5).unwrap(), 1.0);
    }

    #[test]
    fn gp_cdf_errors() {
        assert!(gp_cdf(-1.0, 1.0, 0.1).is_err());
        assert!(gp_cdf(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn egpd_cdf_examples() {
        assert!((p(2.0, 1.0, 0.5).cdf(2.0).unwrap() - 0.5625).abs() < 1e-15);
        for y in [0.1, 1.0, 5.0] {
            let gp = gp_cdf(y, 3.0, 0.2).unwrap();
            assert!((p(1.0, 3.0, 0.2).cdf(y).unwrap() - gp).abs() < 1e-15);
        }
        assert!((p(3.0, 1.5, 0.0).cdf(1.5 * LN_2).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(p(3.0, 1.5, 0.2).cdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn log_pdf_examples() {
        assert!((p(1.0, 1.0, 0.0).log_pdf(1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((p(2.0, 1.0, 0.0).log_pdf(LN_2).unwrap() - 0.5f64.ln()).abs() < 1e-14);
        assert!(p(1.0, 1.0, 0.0).log_pdf(0.0).is_err());
        assert_eq!(p(1.0, 1.0, -0.5).log_pdf(3.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn log_pdf_matches_finite_difference_of_cdf() {
        let params = p(1.7, 4.0, 0.2);
        let y = 3.0;
        let h = 1e-5;
        let fd = (params.cdf(y + h).unwrap() - params.cdf(y - h).unwrap()) / (2.0 * h);
        assert!((params.pdf(y).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn quantile_examples() {
        assert!((p(1.0, 1.0, 1.0).quantile(0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((p(2.0, 1.0, 0.5).quantile(0.5625).unwrap() - 2.0).abs() < 1e-13);
        // H = 1/2, (1 + y/2)^2 = 2
        assert!((p(2.0, 1.0, 0.5).quantile(0.25).unwrap() - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-14);
        assert!((p(1.0, 2.0, 0.0).quantile(0.5).unwrap() - 2.0 * LN_2).abs() < 1e-14);
        assert!(p(1.0, 2.0, 0.0).quantile(1.0).is_err());
        assert!(p(1.0, 2.0, 0.0).quantile(0.0).is_err());
    }

    #[test]
    fn shape_branch_is_continuous() {
        for &(kappa, sigma) in &[(0.5, 0.5), (1.0, 5.0), (2.0, 1.3)] {
            for q in [0.01, 0.3, 0.9, 0.999] {
                let zero = p(kappa, sigma, 0.0).quantile(q).unwrap();
                for xi in [1e-8, -1e-8] {
                    let near = p(kappa, sigma, xi).quantile(q).unwrap();
                    assert!((near - zero).abs() <= 1e-5 * zero);
                }
            }
        }
    }

    #[test]
    fn new_validates() {
        assert!(EgpdParams::new(0.0, 1.0, 0.1).is_err());
        assert!(EgpdParams::new(1.0, -1.0, 0.1).is_err());
        assert!(EgpdParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(!p(1.0, 1.0, 0.99).in_fitting_box());
        assert!(p(1.0, 1.0, -0.5).in_fitting_box());
    }

    #[test]
    fn sampling_is_reproducible() {
        let params = p(2.0, 5.0, 0.2);
        let a = params.sample(100, &mut RngState::new(3, 1));
        let b = params.sample(100, &mut RngState::new(3, 1));
        assert_eq!(a, b);
        assert!(params.sample(0, &mut RngState::new(3, 1)).is_empty());
        assert!(a.iter().all(|&y| y > 0.0));
    }
}
