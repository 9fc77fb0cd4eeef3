//! Theoretical probability weighted moments of the EGPD.
//!
//! With `Q` the quantile function, `nu_j = ∫₀¹ Q(u) u^j du`. Substituting
//! `u = t^kappa` gives the closed form
//!
//! ```text
//! nu_j = (sigma / xi) [kappa B(kappa (j + 1), 1 - xi) - 1 / (j + 1)]
//! ```
//!
//! which is 0/0 at `xi = 0`; that branch, and the conditional moments of
//! `Y | Y >= y_L`, are integrated numerically instead.

use crate::error::{domain, Result};
use crate::numerics::special::log_beta_unchecked;
use crate::numerics::GaussLegendre;

use super::{EgpdParams, XI_ZERO_BAND};

/// Moments exist only below this shape.
const XI_MOMENT_LIMIT: f64 = 1.0 - 1e-6;

/// `g_j(kappa, xi) = kappa B(kappa (j + 1), 1 - xi) - 1 / (j + 1)`, so that
/// `nu_j = sigma g_j / xi`.
pub(crate) fn pwm_shape_factor(j: usize, kappa: f64, xi: f64) -> f64 {
    let jp1 = (j + 1) as f64;
    kappa * libm::exp(log_beta_unchecked(kappa * jp1, 1.0 - xi)) - 1.0 / jp1
}

/// `E[Y F(Y)^j]` in mm.
pub fn theoretical_pwm(j: usize, params: &EgpdParams) -> Result<f64> {
    if params.xi >= XI_MOMENT_LIMIT {
        return Err(domain("probability weighted moments need xi < 1"));
    }
    if params.xi.abs() < XI_ZERO_BAND {
        return PwmQuadrature::new().moment(params, 0.0, j);
    }
    Ok(params.sigma / params.xi * pwm_shape_factor(j, params.kappa, params.xi))
}

/// Conditional moments `E[Y F_c(Y)^j | Y >= threshold]`, `j = 0, 1, 2`, where
/// `F_c = (F - p_L) / (1 - p_L)` and `p_L = F(threshold)`.
pub fn conditional_pwms(params: &EgpdParams, threshold: f64) -> Result<[f64; 3]> {
    if !(threshold >= 0.0) {
        return Err(domain("threshold must be >= 0"));
    }
    if params.xi >= XI_MOMENT_LIMIT {
        return Err(domain("probability weighted moments need xi < 1"));
    }
    let p_low = params.cdf(threshold)?;
    PwmQuadrature::new().moments(params, p_low)
}

/// Composite Gauss-Legendre integration of `s ↦ Q(p_L + (1 - p_L) s) s^j`
/// over `[0, 1]`.
///
/// Both halves of the interval are graded toward their endpoint
/// (`s = w^m / 2` and `1 - s = w^m / 2`) so the integrable singularities of
/// `Q` at `u = 0` and `u = 1` become smooth in `w`. The upper grading power
/// grows as `xi → 1`, where `Q(u) ~ (1 - u)^(-xi)`.
#[derive(Debug, Clone)]
pub struct PwmQuadrature {
    rule: GaussLegendre,
    panels_per_half: usize,
}

impl Default for PwmQuadrature {
    fn default() -> Self {
        Self::new()
    }
}

const LOWER_GRADING: i32 = 4;

impl PwmQuadrature {
    /// Order-32 rule, 32 panels on each half of `[0, 1]`.
    pub fn new() -> Self {
        Self::with_panels(32)
    }

    pub fn with_panels(panels_per_half: usize) -> Self {
        Self { rule: GaussLegendre::new(32), panels_per_half: panels_per_half.max(1) }
    }

    fn upper_grading(xi: f64) -> i32 {
        if xi <= 0.0 {
            LOWER_GRADING
        } else {
            (libm::ceil(4.0 / (1.0 - xi)) as i32).clamp(LOWER_GRADING, 80)
        }
    }

    /// `[nu_0, nu_1, nu_2]` conditional on `u >= p_low` (`p_low = 0` gives the
    /// unconditional moments).
    pub fn moments(&self, params: &EgpdParams, p_low: f64) -> Result<[f64; 3]> {
        if !(0.0..1.0).contains(&p_low) {
            return Err(domain("conditioning level must lie in [0, 1)"));
        }
        let mut out = [0.0; 3];
        self.integrate(params, p_low, |s, q| {
            let s2 = s * s;
            [q, q * s, q * s2]
        }, &mut out);
        Ok(out)
    }

    /// A single conditional moment of arbitrary order.
    pub fn moment(&self, params: &EgpdParams, p_low: f64, j: usize) -> Result<f64> {
        if !(0.0..1.0).contains(&p_low) {
            return Err(domain("conditioning level must lie in [0, 1)"));
        }
        let mut out = [0.0; 1];
        self.integrate(params, p_low, |s, q| [q * libm::pow(s, j as f64)], &mut out);
        Ok(out[0])
    }

    fn integrate<const N: usize, F>(&self, params: &EgpdParams, p_low: f64, f: F, out: &mut [f64; N])
    where
        F: Fn(f64, f64) -> [f64; N],
    {
        let keep = 1.0 - p_low;
        let m_lo = LOWER_GRADING;
        let m_hi = Self::upper_grading(params.xi);
        let width = 1.0 / self.panels_per_half as f64;
        let half = 0.5 * width;
        let nodes = self.rule.nodes();
        let weights = self.rule.weights();

        for k in 0..self.panels_per_half {
            let centre = (k as f64 + 0.5) * width;
            for (x, wt) in nodes.iter().zip(weights) {
                let w = centre + half * x;
                let w_pow_m1_lo = libm::pow(w, (m_lo - 1) as f64);
                let w_pow_m1_hi = libm::pow(w, (m_hi - 1) as f64);

                // lower half: s = w^m / 2
                let s = 0.5 * w_pow_m1_lo * w;
                let ds = 0.5 * m_lo as f64 * w_pow_m1_lo;
                let u = p_low + keep * s;
                let q = params.quantile_unchecked(u, keep * (1.0 - s));
                let vals = f(s, q);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += wt * half * ds * v;
                }

                // upper half: 1 - s = w^m / 2
                let tail = 0.5 * w_pow_m1_hi * w;
                if tail == 0.0 {
                    continue;
                }
                let s = 1.0 - tail;
                let ds = 0.5 * m_hi as f64 * w_pow_m1_hi;
                let u = p_low + keep * s;
                let q = params.quantile_unchecked(u, keep * tail);
                let vals = f(s, q);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += wt * half * ds * v;
                }
            }
        }
    }
}
