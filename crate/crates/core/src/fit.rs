//! Diagnostics shared by every fitter.

use alloc::vec::Vec;

/// Conditions worth surfacing next to a fitted parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DiagnosticFlag {
    /// A parameter finished on (or within 1e-4 of) its fitting box edge.
    Boundary,
    /// Fewer than 50 observations per free parameter.
    SmallSample,
    /// The cancellation hook (per-fit timeout) stopped the optimizer.
    Cancelled,
    /// The weights of a mixture carry a flat Dirichlet(1, ..., 1) prior.
    FlatWeightPrior,
}

/// Convergence report for one fit. Fitters always return their best
/// candidate; `converged` tells the caller whether to trust it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitDiagnostics {
    pub converged: bool,
    /// Minimized objective at the returned point.
    pub objective: f64,
    pub log_likelihood: Option<f64>,
    pub log_posterior: Option<f64>,
    /// Largest moment-matching residual (PWM fitters).
    pub residual: Option<f64>,
    /// Index of the start that produced the returned point (0 = base start).
    pub best_restart: usize,
    pub restarts_run: usize,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best objective never got worse across optimizer iterations.
    pub monotone: bool,
    pub flags: Vec<DiagnosticFlag>,
}

impl FitDiagnostics {
    pub fn has_flag(&self, flag: DiagnosticFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub(crate) fn flag(&mut self, flag: DiagnosticFlag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
            self.flags.sort();
        }
    }
}

/// Observations per free parameter below which a fit is flagged small-sample.
pub const SMALL_SAMPLE_PER_PARAMETER: usize = 50;
