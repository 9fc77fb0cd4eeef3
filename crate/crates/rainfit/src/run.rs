//! The `(site, method)` fitting grid.

use std::time::{Duration, Instant};

use rainfit_core::corpus::SiteSeries;
use rainfit_core::egpd::CensoringSpec;
use rainfit_core::empirical::SortedSample;
use rainfit_core::evaluation::{FitResult, MethodId, QuantileSet, SiteQuantiles};
use rainfit_core::methods::{fit_method, MethodOptions};
use rainfit_core::numerics::rng::derive_stream;
use rainfit_core::numerics::NelderMeadOptions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub const DEFAULT_TIMEOUT_SECS: f64 = 60.0;

/// Settings of a fitting run, written next to its outputs as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub methods: Vec<MethodId>,
    pub quantiles: QuantileSet,
    pub threshold_mm: f64,
    pub egpd_restarts: usize,
    pub mixture_restarts: usize,
    pub seed: u64,
    pub min_wet: usize,
    /// Per-fit wall-clock budget; an expired fit is recorded as not
    /// converged.
    pub timeout_secs: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            methods: MethodId::ALL.to_vec(),
            quantiles: QuantileSet::default(),
            threshold_mm: 1.0,
            egpd_restarts: 4,
            mixture_restarts: 8,
            seed: 0,
            min_wet: rainfit_core::corpus::MIN_WET_DAYS,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> AppResult<()> {
        if self.methods.is_empty() {
            return Err(AppError::config("no methods selected"));
        }
        CensoringSpec::new(self.threshold_mm).map_err(|e| AppError::config(format!("threshold: {e}")))?;
        if !(self.timeout_secs > 0.0) {
            return Err(AppError::config("timeout must be > 0"));
        }
        Ok(())
    }

    /// Seed of one task, a function of the run seed, the site's position in
    /// the manifest and the method.
    pub fn task_seed(&self, site_index: usize, method: MethodId) -> u64 {
        derive_stream(derive_stream(self.seed, site_index as u64), method.index() as u64)
    }
}

/// A site entering the fitting grid with its manifest position.
#[derive(Debug, Clone)]
pub struct IndexedSite {
    pub index: usize,
    pub series: SiteSeries,
}

/// Fits one method to one site. Errors and expired budgets become records
/// with `converged = false`.
pub fn fit_one(site: &SiteSeries, site_index: usize, method: MethodId, config: &RunConfig) -> FitResult {
    let start = Instant::now();
    let budget = Duration::from_secs_f64(config.timeout_secs);
    let expired = || start.elapsed() > budget;
    let options = MethodOptions {
        censoring: CensoringSpec { threshold: config.threshold_mm },
        egpd_restarts: config.egpd_restarts,
        mixture_restarts: config.mixture_restarts,
        seed: config.task_seed(site_index, method),
        optimizer: NelderMeadOptions { cancel: Some(&expired), ..Default::default() },
        ..Default::default()
    };
    let probabilities = config.quantiles.probabilities().to_vec();
    let mut record = FitResult {
        site_id: site.site_id.clone(),
        method,
        probabilities,
        estimated_quantiles: Vec::new(),
        converged: false,
        fit_seconds: 0.0,
        params: None,
        diagnostics: None,
        error: None,
    };
    match fit_method(method, site.values(), &options) {
        Ok(fit) => {
            match fit.quantiles(&config.quantiles) {
                Ok(q) => {
                    let increasing = q.windows(2).all(|w| w[0] < w[1]) && q.iter().all(|v| *v > 0.0 && v.is_finite());
                    record.converged = fit.diagnostics.converged && increasing;
                    if !increasing {
                        record.error = Some("fitted quantiles are not strictly increasing".into());
                    }
                    record.estimated_quantiles = q;
                }
                Err(e) => record.error = Some(format!("quantiles: {e}")),
            }
            record.params = Some(fit.params);
            record.diagnostics = Some(fit.diagnostics);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record.fit_seconds = start.elapsed().as_secs_f64();
    record
}

/// Fits every `(site, method)` pair on `jobs` workers. Records come back in
/// site order, then method order, whatever the worker count.
pub fn run_fits(sites: &[IndexedSite], config: &RunConfig, jobs: usize) -> AppResult<Vec<FitResult>> {
    let tasks: Vec<(&IndexedSite, MethodId)> =
        sites.iter().flat_map(|s| config.methods.iter().map(move |m| (s, *m))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AppError::config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(|(s, m)| fit_one(&s.series, s.index, *m, config)).collect()))
}

/// Type-7 quantiles of a site's wet-day sample.
pub fn empirical_quantiles(site: &SiteSeries, qset: &QuantileSet) -> AppResult<SiteQuantiles> {
    let sample = SortedSample::from_slice(site.values())
        .map_err(|e| AppError::Fit(format!("site `{}`: {e}", site.site_id)))?;
    let quantiles = qset
        .probabilities()
        .iter()
        .map(|&p| sample.quantile(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| AppError::Fit(format!("site `{}`: {e}", site.site_id)))?;
    Ok(SiteQuantiles { site_id: site.site_id.clone(), probabilities: qset.probabilities().to_vec(), quantiles })
}
