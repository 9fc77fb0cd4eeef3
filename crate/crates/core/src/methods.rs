//! The seven estimators behind a single entry point.

use alloc::vec::Vec;

use crate::egpd::{fit_mle, fit_mle_censored, fit_pwm, fit_pwm_censored, CensoringSpec, EgpdFitOptions};
use crate::error::Result;
use crate::evaluation::{FittedParams, MethodId, QuantileSet};
use crate::fit::FitDiagnostics;
use crate::gamma_mixture::{fit_map, DamslethHyper, MapOptions};
use crate::numerics::NelderMeadOptions;

/// Settings shared by every method; each fitter reads the fields it needs.
#[derive(Debug, Clone, Copy)]
pub struct MethodOptions<'a> {
    pub censoring: CensoringSpec,
    /// Jittered restarts on top of the base start (EGPD fitters).
    pub egpd_restarts: usize,
    /// Total starts for mixture fits.
    pub mixture_restarts: usize,
    pub hyper: DamslethHyper,
    /// Seeds restart jitter.
    pub seed: u64,
    pub optimizer: NelderMeadOptions<'a>,
}

impl Default for MethodOptions<'_> {
    fn default() -> Self {
        Self {
            censoring: CensoringSpec::default(),
            egpd_restarts: 4,
            mixture_restarts: 8,
            hyper: DamslethHyper::default(),
            seed: 0,
            optimizer: NelderMeadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodFit {
    pub params: FittedParams,
    pub diagnostics: FitDiagnostics,
}

impl MethodFit {
    /// Fitted quantiles at every level of `qset`.
    pub fn quantiles(&self, qset: &QuantileSet) -> Result<Vec<f64>> {
        qset.probabilities().iter().map(|&p| self.params.quantile(p)).collect()
    }
}

/// Fits `method` to a wet-day sample.
pub fn fit_method(method: MethodId, data: &[f64], options: &MethodOptions<'_>) -> Result<MethodFit> {
    let egpd = EgpdFitOptions { jittered_restarts: options.egpd_restarts, seed: options.seed, optimizer: options.optimizer };
    let egpd_fit = match method {
        MethodId::NaveauMle => fit_mle(data, &egpd)?,
        MethodId::NaveauPwm => fit_pwm(data, &egpd)?,
        MethodId::NaveauMleC => fit_mle_censored(data, options.censoring, &egpd)?,
        MethodId::NaveauPwmC => fit_pwm_censored(data, options.censoring, &egpd)?,
        MethodId::GammaMixture2 | MethodId::GammaMixture3 | MethodId::GammaMixture4 => {
            let k = method.components().unwrap_or(2);
            let map = MapOptions { restarts: options.mixture_restarts, seed: options.seed, optimizer: options.optimizer };
            let fit = fit_map(data, k, &options.hyper, &map)?;
            return Ok(MethodFit { params: FittedParams::GammaMixture(fit.params), diagnostics: fit.diagnostics });
        }
    };
    Ok(MethodFit { params: FittedParams::Egpd(egpd_fit.params), diagnostics: egpd_fit.diagnostics })
}
