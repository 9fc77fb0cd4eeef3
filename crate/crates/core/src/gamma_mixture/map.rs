//! Posterior-mode fitting of gamma mixtures.
//!
//! The search runs Nelder-Mead on `3K - 1` unconstrained coordinates:
//! `K - 1` softmax logits (the first logit is pinned at zero), then
//! `ln a_k` and `ln b_k`, each clamped to `[-12, 12]`.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::fit::{DiagnosticFlag, FitDiagnostics, SMALL_SAMPLE_PER_PARAMETER};
use crate::numerics::special::log_gamma_unchecked;
use crate::numerics::{nelder_mead, Minimum, NelderMeadOptions, RngState};

use super::{DamslethHyper, GammaMixtureParams, LogDensity};

const LOG_PARAM_BOUND: f64 = 12.0;
const OBSERVATIONS_PER_COMPONENT: usize = 10;
const JITTER_SD: f64 = 0.3;
const RESTART_STREAM: u64 = 0x6761_6d6d_61; // "gamma"
/// The best start is re-polished by Nelder-Mead until a pass improves the
/// objective by less than this (relative).
const POLISH_TOL: f64 = 1e-9;
const MAX_POLISH: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct MapOptions<'a> {
    /// Total starts, including the unjittered one.
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: NelderMeadOptions<'a>,
}

impl Default for MapOptions<'_> {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, optimizer: NelderMeadOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapFit {
    /// Components ordered by mean `a_k b_k`.
    pub params: GammaMixtureParams,
    pub diagnostics: FitDiagnostics,
}

fn decode(theta: &[f64], k: usize) -> GammaMixtureParams {
    let logits = core::iter::once(0.0).chain(theta[..k - 1].iter().copied());
    let top = logits.clone().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logits.map(|l| libm::exp(l - top)).collect();
    let total: f64 = raw.iter().sum();
    let bounded = |x: f64| libm::exp(x.clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND));
    GammaMixtureParams {
        weights: raw.iter().map(|w| w / total).collect(),
        shapes: theta[k - 1..2 * k - 1].iter().map(|&x| bounded(x)).collect(),
        scales: theta[2 * k - 1..].iter().map(|&x| bounded(x)).collect(),
    }
}

fn encode(p: &GammaMixtureParams) -> Vec<f64> {
    let k = p.components();
    let w0 = p.weights[0];
    let mut theta = Vec::with_capacity(3 * k - 1);
    theta.extend(p.weights[1..].iter().map(|w| libm::log(w / w0)));
    theta.extend(p.shapes.iter().map(|a| libm::log(*a)));
    theta.extend(p.scales.iter().map(|b| libm::log(*b)));
    theta
}

/// Moment-matched components on `k` equal-count slices of the sorted data.
fn sliced_start(sorted: &[f64], k: usize) -> GammaMixtureParams {
    let n = sorted.len();
    let mut shapes = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for s in 0..k {
        let slice = &sorted[s * n / k..(s + 1) * n / k];
        let m = slice.iter().sum::<f64>() / slice.len() as f64;
        let var = slice.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / slice.len() as f64;
        let var = var.max(1e-6 * m * m);
        let bound = libm::exp(LOG_PARAM_BOUND - 1.0);
        shapes.push((m * m / var).clamp(1.0 / bound, bound));
        scales.push((var / m).clamp(1.0 / bound, bound));
        weights.push(slice.len() as f64 / n as f64);
    }
    GammaMixtureParams { weights, shapes, scales }
}

struct Objective<'d> {
    data: &'d [f64],
    log_data: Vec<f64>,
    k: usize,
    hyper: DamslethHyper,
    log_rho: f64,
    log_ig_const: f64,
}

impl Objective<'_> {
    fn log_prior(&self, a: f64, b: f64) -> f64 {
        let h = &self.hyper;
        let ln_b = libm::log(b);
        self.log_ig_const - (h.u + 1.0) * ln_b - h.v / b + (a - 1.0) * self.log_rho
            - a * h.q * ln_b
            - h.r * log_gamma_unchecked(a)
    }

    /// `(log posterior, log likelihood)` at decoded parameters.
    fn eval_params(&self, p: &GammaMixtureParams) -> (f64, f64) {
        let density = LogDensity::new(p);
        let mut ll = 0.0;
        for (y, ly) in self.data.iter().zip(&self.log_data) {
            ll += density.eval(*y, *ly);
        }
        let prior: f64 = p.shapes.iter().zip(&p.scales).map(|(a, b)| self.log_prior(*a, *b)).sum();
        (ll + prior, ll)
    }

    fn negative(&self, theta: &[f64]) -> f64 {
        let (lp, _) = self.eval_params(&decode(theta, self.k));
        if lp.is_nan() {
            f64::INFINITY
        } else {
            -lp
        }
    }
}

/// Restarts Nelder-Mead from `run` while that still improves the objective.
fn polish<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    mut run: Minimum,
    options: &NelderMeadOptions<'_>,
) -> Result<(Minimum, usize, usize, bool)> {
    let (mut iterations, mut evaluations, mut monotone) = (0, 0, true);
    for _ in 0..MAX_POLISH {
        if run.cancelled {
            break;
        }
        let next = nelder_mead(&mut f, &run.x, options)?;
        iterations += next.iterations;
        evaluations += next.evaluations;
        monotone &= next.monotone && next.value <= run.value;
        let gain = run.value - next.value;
        let done = !(gain > POLISH_TOL * (1.0 + run.value.abs()));
        if next.value <= run.value {
            run = next;
        }
        if done {
            break;
        }
    }
    Ok((run, iterations, evaluations, monotone))
}

/// Posterior mode of a `k`-component mixture under the Damsleth prior.
///
/// Needs at least `10 k` observations. Returns the best of
/// `options.restarts` jittered starts, converged or not.
pub fn fit_map(data: &[f64], k: usize, hyper: &DamslethHyper, options: &MapOptions<'_>) -> Result<MapFit> {
    if k == 0 {
        return Err(domain("a mixture needs at least one component"));
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(domain("observations must be finite and > 0"));
    }
    if data.len() < OBSERVATIONS_PER_COMPONENT * k {
        return Err(Error::InsufficientData { needed: OBSERVATIONS_PER_COMPONENT * k, got: data.len() });
    }
    hyper.validate()?;

    let objective = Objective {
        data,
        log_data: data.iter().map(|y| libm::log(*y)).collect(),
        k,
        hyper: *hyper,
        log_rho: libm::log(hyper.rho),
        log_ig_const: hyper.u * libm::log(hyper.v) - log_gamma_unchecked(hyper.u),
    };

    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let base = encode(&sliced_start(&sorted, k));
    let mut rng = RngState::new(options.seed, RESTART_STREAM);

    let restarts = options.restarts.max(1);
    let mut best: Option<(usize, Minimum)> = None;
    let (mut iterations, mut evaluations, mut monotone) = (0, 0, true);
    let mut runs = 0;
    for r in 0..restarts {
        let mut x0 = base.clone();
        if r > 0 {
            for x in x0.iter_mut() {
                *x += JITTER_SD * rng.normal();
            }
        }
        let Ok(run) = nelder_mead(|t| objective.negative(t), &x0, &options.optimizer) else {
            continue;
        };
        runs += 1;
        iterations += run.iterations;
        evaluations += run.evaluations;
        monotone &= run.monotone;
        let cancelled = run.cancelled;
        if best.as_ref().map_or(true, |(_, b)| run.value < b.value) {
            best = Some((r, run));
        }
        if cancelled {
            break;
        }
    }
    let (best_restart, run) = best.ok_or_else(|| domain("no start was evaluated"))?;
    let (run, it, ev, mono) = polish(|t| objective.negative(t), run, &options.optimizer)?;
    iterations += it;
    evaluations += ev;
    monotone &= mono;
    let params = decode(&run.x, k);
    let (log_posterior, log_likelihood) = objective.eval_params(&params);
    let mut diagnostics = FitDiagnostics {
        converged: run.converged && !run.cancelled && log_posterior.is_finite(),
        objective: -log_posterior,
        log_likelihood: Some(log_likelihood),
        log_posterior: Some(log_posterior),
        residual: None,
        best_restart,
        restarts_run: runs,
        iterations,
        evaluations,
        monotone,
        flags: Vec::new(),
    };
    diagnostics.flag(DiagnosticFlag::FlatWeightPrior);
    if run.cancelled {
        diagnostics.flag(DiagnosticFlag::Cancelled);
    }
    let edge = LOG_PARAM_BOUND - 1e-4;
    if run.x[k - 1..].iter().any(|x| x.abs() >= edge) {
        diagnostics.flag(DiagnosticFlag::Boundary);
    }
    if data.len() < SMALL_SAMPLE_PER_PARAMETER * (3 * k - 1) {
        diagnostics.flag(DiagnosticFlag::SmallSample);
    }
    Ok(MapFit { params: params.sorted_by_mean(), diagnostics })
}
