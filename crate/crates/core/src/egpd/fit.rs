//! The four EGPD estimators: MLE, PWM, and their left-censored variants.
//!
//! Every fitter runs Nelder-Mead from a GP-like base start
//! (`kappa = 1`, `sigma = mean`, `xi = 0.1`) plus seeded jittered restarts
//! and returns the best candidate, converged or not.

use alloc::vec::Vec;

use crate::empirical::SortedSample;
use crate::error::{domain, Error, Result};
use crate::fit::{DiagnosticFlag, FitDiagnostics, SMALL_SAMPLE_PER_PARAMETER};
use crate::numerics::{nelder_mead, Minimum, NelderMeadOptions, RngState};

use super::pwm::{pwm_shape_factor, PwmQuadrature};
use super::{DensityTerms, EgpdParams, XI_MAX, XI_MIN, XI_ZERO_BAND};

/// Minimum number of (uncensored) observations a fit accepts.
pub const MIN_OBSERVATIONS: usize = 30;
/// A PWM fit converges when every moment residual is at most this.
pub const PWM_RESIDUAL_TOL: f64 = 1e-6;

const BASE_KAPPA: f64 = 1.0;
const BASE_XI: f64 = 0.1;
const JITTER_SD: f64 = 0.25;
const JITTER_MAX_LOG: f64 = 0.5;
const BOUNDARY_BAND: f64 = 1e-4;
const RESTART_STREAM: u64 = 0x6567_7064; // "egpd"

/// Left-censoring threshold `y_L` in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CensoringSpec {
    pub threshold: f64,
}

impl CensoringSpec {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(domain("censoring threshold must be finite and > 0"));
        }
        Ok(Self { threshold })
    }
}

impl Default for CensoringSpec {
    fn default() -> Self {
        Self { threshold: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EgpdFitOptions<'a> {
    /// Restarts in addition to the base start.
    pub jittered_restarts: usize,
    /// Seeds the restart jitter.
    pub seed: u64,
    pub optimizer: NelderMeadOptions<'a>,
}

impl Default for EgpdFitOptions<'_> {
    fn default() -> Self {
        Self { jittered_restarts: 4, seed: 0, optimizer: NelderMeadOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgpdFit {
    pub params: EgpdParams,
    pub diagnostics: FitDiagnostics,
}

// Shape <-> unconstrained coordinate, logistic onto [XI_MIN, XI_MAX].
fn xi_from_coord(z: f64) -> f64 {
    XI_MIN + (XI_MAX - XI_MIN) / (1.0 + libm::exp(-z))
}

fn coord_from_xi(xi: f64) -> f64 {
    let t = ((xi - XI_MIN) / (XI_MAX - XI_MIN)).clamp(1e-12, 1.0 - 1e-12);
    libm::log(t / (1.0 - t))
}

#[derive(Debug, Clone, Copy)]
struct Start {
    kappa: f64,
    sigma: f64,
    xi: f64,
}

/// Base start followed by `jittered` multiplicatively perturbed copies.
fn starts(mean: f64, jittered: usize, seed: u64) -> Vec<Start> {
    let base = Start { kappa: BASE_KAPPA, sigma: mean, xi: BASE_XI };
    let mut rng = RngState::new(seed, RESTART_STREAM);
    let mut factor = move || libm::exp((JITTER_SD * rng.normal()).clamp(-JITTER_MAX_LOG, JITTER_MAX_LOG));
    let mut out = Vec::with_capacity(jittered + 1);
    out.push(base);
    for _ in 0..jittered {
        let kappa = base.kappa * factor();
        let sigma = base.sigma * factor();
        let xi = (base.xi * factor()).clamp(XI_MIN, XI_MAX);
        out.push(Start { kappa, sigma, xi });
    }
    out
}

fn validate(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(domain("observations must be finite and > 0"));
    }
    Ok(())
}

fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Runs every start and keeps the lowest objective (first wins ties).
fn best_of<F, E>(starts: &[Vec<f64>], mut objective: F, options: &NelderMeadOptions<'_>, mut on_error: E) -> Option<(usize, Minimum, usize, usize, bool)>
where
    F: FnMut(&[f64]) -> f64,
    E: FnMut(),
{
    let mut best: Option<(usize, Minimum)> = None;
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut monotone = true;
    for (idx, x0) in starts.iter().enumerate() {
        let run = match nelder_mead(&mut objective, x0, options) {
            Ok(run) => run,
            Err(_) => {
                on_error();
                continue;
            }
        };
        iterations += run.iterations;
        evaluations += run.evaluations;
        monotone &= run.monotone;
        let better = match &best {
            None => true,
            Some((_, b)) => run.value < b.value,
        };
        let cancelled = run.cancelled;
        if better {
            best = Some((idx, run));
        }
        if cancelled {
            break;
        }
    }
    best.map(|(idx, run)| (idx, run, iterations, evaluations, monotone))
}

fn finish(
    params: EgpdParams,
    run: &Minimum,
    best_restart: usize,
    restarts_run: usize,
    iterations: usize,
    evaluations: usize,
    monotone: bool,
    n_obs: usize,
) -> FitDiagnostics {
    let mut d = FitDiagnostics {
        converged: run.converged && run.value.is_finite(),
        objective: run.value,
        log_likelihood: None,
        log_posterior: None,
        residual: None,
        best_restart,
        restarts_run,
        iterations,
        evaluations,
        monotone,
        flags: Vec::new(),
    };
    if params.xi - XI_MIN < BOUNDARY_BAND || XI_MAX - params.xi < BOUNDARY_BAND {
        d.flag(DiagnosticFlag::Boundary);
    }
    if run.cancelled {
        d.converged = false;
        d.flag(DiagnosticFlag::Cancelled);
    }
    if n_obs < 3 * SMALL_SAMPLE_PER_PARAMETER {
        d.flag(DiagnosticFlag::SmallSample);
    }
    d
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

fn decode_mle(theta: &[f64]) -> EgpdParams {
    EgpdParams { kappa: libm::exp(theta[0]), sigma: libm::exp(theta[1]), xi: xi_from_coord(theta[2]) }
}

fn encode_mle(s: &Start) -> Vec<f64> {
    alloc::vec![libm::log(s.kappa), libm::log(s.sigma), coord_from_xi(s.xi)]
}

/// Negative log-likelihood with optional left censoring: observations below
/// the threshold contribute `ln F(threshold)` each instead of a density.
fn negative_log_likelihood(params: &EgpdParams, data: &[f64], censor: Option<(f64, usize)>) -> f64 {
    if !(params.kappa > 0.0 && params.kappa.is_finite() && params.sigma > 0.0 && params.sigma.is_finite()) {
        return f64::INFINITY;
    }
    let terms = DensityTerms::new(params);
    let mut total = 0.0;
    match censor {
        None => {
            for &y in data {
                total += terms.log_pdf(y);
            }
        }
        Some((threshold, n_below)) => {
            for &y in data.iter().filter(|&&y| y >= threshold) {
                total += terms.log_pdf(y);
            }
            if n_below > 0 {
                let log_cdf = match params.cdf(threshold) {
                    Ok(c) => libm::log(c),
                    Err(_) => f64::NEG_INFINITY,
                };
                total += n_below as f64 * log_cdf;
            }
        }
    }
    if total.is_nan() {
        f64::INFINITY
    } else {
        -total
    }
}

fn mle_impl(data: &[f64], censor: Option<(f64, usize)>, options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    let n_used = match censor {
        Some((_, n_below)) => data.len() - n_below,
        None => data.len(),
    };
    let starts: Vec<Vec<f64>> =
        starts(mean(data), options.jittered_restarts, options.seed).iter().map(encode_mle).collect();
    // per-observation scale keeps optimizer tolerances independent of n
    let scale = 1.0 / data.len() as f64;
    let objective = |theta: &[f64]| scale * negative_log_likelihood(&decode_mle(theta), data, censor);
    let (idx, run, iterations, evaluations, monotone) =
        best_of(&starts, objective, &options.optimizer, || {})
            .ok_or_else(|| domain("likelihood is not finite at any start"))?;
    let params = decode_mle(&run.x);
    let log_likelihood = -negative_log_likelihood(&params, data, censor);
    let mut diagnostics =
        finish(params, &run, idx, starts.len(), iterations, evaluations, monotone, n_used);
    diagnostics.objective = -log_likelihood;
    diagnostics.log_likelihood = Some(log_likelihood);
    let scale_drift = libm::log(params.sigma / mean(data)).abs();
    if libm::log(params.kappa).abs() > 10.0 || scale_drift > 10.0 {
        diagnostics.flag(DiagnosticFlag::Boundary);
    }
    Ok(EgpdFit { params, diagnostics })
}

/// Maximum likelihood fit of `(kappa, sigma, xi)` with `xi` kept in the
/// fitting box.
pub fn fit_mle(data: &[f64], options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    validate(data)?;
    if data.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: data.len() });
    }
    mle_impl(data, None, options)
}

/// Maximum likelihood with observations below `spec.threshold` treated as
/// left-censored.
///
/// When no observation falls below the threshold the objective, the starts
/// and therefore the result are identical to [`fit_mle`].
pub fn fit_mle_censored(data: &[f64], spec: CensoringSpec, options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    validate(data)?;
    let n_below = data.iter().filter(|&&y| y < spec.threshold).count();
    if n_below == data.len() {
        return Err(Error::AllCensored { n: data.len(), threshold: spec.threshold });
    }
    let n_above = data.len() - n_below;
    if n_above < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: n_above });
    }
    if n_below == 0 {
        return mle_impl(data, None, options);
    }
    mle_impl(data, Some((spec.threshold, n_below)), options)
}

// ---------------------------------------------------------------------------
// Probability weighted moments
// ---------------------------------------------------------------------------

/// Moment matching drives the objective to zero, so the optimizer stops on
/// simplex size rather than on objective spread.
fn pwm_optimizer<'a>(base: &NelderMeadOptions<'a>) -> NelderMeadOptions<'a> {
    NelderMeadOptions { f_tol: base.f_tol.min(1e-24), ..*base }
}

/// Shape from its coordinate, pushed off the 0/0 branch of the closed form.
fn pwm_xi(z: f64) -> f64 {
    let xi = xi_from_coord(z);
    if xi.abs() < XI_ZERO_BAND {
        XI_ZERO_BAND.copysign(if xi == 0.0 { 1.0 } else { xi })
    } else {
        xi
    }
}

fn ratio_residuals(kappa: f64, xi: f64, r1: f64, r2: f64) -> Option<(f64, f64, f64)> {
    let g0 = pwm_shape_factor(0, kappa, xi);
    let g1 = pwm_shape_factor(1, kappa, xi);
    let g2 = pwm_shape_factor(2, kappa, xi);
    if !(g0.is_finite() && g1.is_finite() && g2.is_finite()) || g0 == 0.0 {
        return None;
    }
    Some((g1 / g0 - r1, g2 / g0 - r2, g0))
}

/// Probability weighted moment fit: matches `nu_1 / nu_0` and `nu_2 / nu_0`
/// over `(ln kappa, xi)`, then sets `sigma = xi nu_0 / g_0`.
pub fn fit_pwm(data: &[f64], options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    validate(data)?;
    if data.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: data.len() });
    }
    let sample = SortedSample::from_slice(data)?;
    let moments = [sample.pwm(0)?, sample.pwm(1)?, sample.pwm(2)?];
    fit_pwm_from_moments(moments, data.len(), options)
}

/// PWM fit from sample moments `[nu_0, nu_1, nu_2]` of `n_obs` observations.
pub fn fit_pwm_from_moments(moments: [f64; 3], n_obs: usize, options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    let [nu0, nu1, nu2] = moments;
    if !(nu0 > 0.0 && nu0.is_finite()) {
        return Err(domain("zeroth moment must be positive"));
    }
    let start_scale = nu0;
    let (r1, r2) = (nu1 / nu0, nu2 / nu0);
    let starts: Vec<Vec<f64>> = starts(start_scale, options.jittered_restarts, options.seed)
        .iter()
        .map(|s| alloc::vec![libm::log(s.kappa), coord_from_xi(s.xi)])
        .collect();
    let objective = |theta: &[f64]| {
        let kappa = libm::exp(theta[0]);
        let xi = pwm_xi(theta[1]);
        match ratio_residuals(kappa, xi, r1, r2) {
            Some((e1, e2, _)) => e1 * e1 + e2 * e2,
            None => f64::INFINITY,
        }
    };
    let nm = pwm_optimizer(&options.optimizer);
    let (idx, run, iterations, evaluations, monotone) = best_of(&starts, objective, &nm, || {})
        .ok_or_else(|| domain("moment equations are not finite at any start"))?;

    let kappa = libm::exp(run.x[0]);
    let xi = pwm_xi(run.x[1]);
    let (e1, e2, g0) = ratio_residuals(kappa, xi, r1, r2).ok_or_else(|| domain("moment equations diverged"))?;
    let sigma = xi * nu0 / g0;
    let params = EgpdParams { kappa, sigma, xi };
    let residual = e1.abs().max(e2.abs());
    let mut diagnostics = finish(params, &run, idx, starts.len(), iterations, evaluations, monotone, n_obs);
    diagnostics.residual = Some(residual);
    diagnostics.converged = residual <= PWM_RESIDUAL_TOL && sigma > 0.0 && sigma.is_finite() && !run.cancelled;
    Ok(EgpdFit { params, diagnostics })
}

/// Censored PWM fit: matches the sample PWMs of the exceedances
/// `{y >= y_L}` against the PWMs of `Y | Y >= y_L`, over all three
/// parameters, using squared relative residuals.
pub fn fit_pwm_censored(data: &[f64], spec: CensoringSpec, options: &EgpdFitOptions<'_>) -> Result<EgpdFit> {
    validate(data)?;
    let exceedances: Vec<f64> = data.iter().copied().filter(|&y| y >= spec.threshold).collect();
    if exceedances.is_empty() {
        return Err(Error::AllCensored { n: data.len(), threshold: spec.threshold });
    }
    if exceedances.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: exceedances.len() });
    }
    let sample = SortedSample::new(exceedances)?;
    let target = [sample.pwm(0)?, sample.pwm(1)?, sample.pwm(2)?];
    fit_pwm_censored_from_moments(target, spec, sample.len(), options)
}

/// Censored PWM fit from the moments `[nu_0, nu_1, nu_2]` of `n_obs`
/// exceedances of `spec.threshold`.
pub fn fit_pwm_censored_from_moments(
    target: [f64; 3],
    spec: CensoringSpec,
    n_obs: usize,
    options: &EgpdFitOptions<'_>,
) -> Result<EgpdFit> {
    if target.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(domain("exceedance moments must be positive"));
    }
    let start_scale = target[0];
    let quad = PwmQuadrature::new();
    let relative_residuals = |params: &EgpdParams| -> Option<[f64; 3]> {
        let p_low = params.cdf(spec.threshold).ok()?;
        if !(p_low < 1.0) {
            return None;
        }
        let nu = quad.moments(params, p_low).ok()?;
        let r = [
            (nu[0] - target[0]) / target[0],
            (nu[1] - target[1]) / target[1],
            (nu[2] - target[2]) / target[2],
        ];
        r.iter().all(|v| v.is_finite()).then_some(r)
    };
    let starts: Vec<Vec<f64>> =
        starts(start_scale, options.jittered_restarts, options.seed).iter().map(encode_mle).collect();
    let objective = |theta: &[f64]| match relative_residuals(&decode_mle(theta)) {
        Some(r) => r[0] * r[0] + r[1] * r[1] + r[2] * r[2],
        None => f64::INFINITY,
    };
    let nm = pwm_optimizer(&options.optimizer);
    let (idx, run, iterations, evaluations, monotone) = best_of(&starts, objective, &nm, || {})
        .ok_or_else(|| domain("conditional moments are not finite at any start"))?;
    let params = decode_mle(&run.x);
    let residual = relative_residuals(&params)
        .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .unwrap_or(f64::INFINITY);
    let mut diagnostics = finish(params, &run, idx, starts.len(), iterations, evaluations, monotone, n_obs);
    diagnostics.residual = Some(residual);
    diagnostics.converged = residual <= PWM_RESIDUAL_TOL && !run.cancelled;
    Ok(EgpdFit { params, diagnostics })
}
