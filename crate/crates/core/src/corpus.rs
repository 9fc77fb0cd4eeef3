//! Per-site wet-day samples and synthetic multi-site corpora.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::egpd::EgpdParams;
use crate::error::{domain, Error, Result};
use crate::gamma_mixture::GammaMixtureParams;
use crate::numerics::rng::derive_stream;
use crate::numerics::RngState;

/// Sites need at least this many wet days to enter a benchmark.
pub const MIN_WET_DAYS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Source {
    Ingested,
    Synthetic,
}

/// One site's positive daily rainfall amounts (mm).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiteSeries {
    pub site_id: String,
    values: Vec<f64>,
    pub source: Source,
    /// Generator of a synthetic site.
    pub truth: Option<GeneratorSpec>,
}

impl SiteSeries {
    /// Keeps the strictly positive values of `raw` in order. Errors if none
    /// remain or if any value is negative or not finite.
    pub fn new(site_id: impl Into<String>, raw: Vec<f64>, source: Source) -> Result<Self> {
        if let Some(bad) = raw.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("rainfall must be finite and >= 0, got {bad}")));
        }
        let values: Vec<f64> = raw.into_iter().filter(|v| *v > 0.0).collect();
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(Self { site_id: site_id.into(), values, source, truth: None })
    }

    pub fn with_truth(mut self, truth: GeneratorSpec) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_wet(&self) -> usize {
        self.values.len()
    }
}

/// Keeps sites with at least `min_wet` wet days; returns them with the
/// number excluded.
pub fn filter_corpus(sites: Vec<SiteSeries>, min_wet: usize) -> (Vec<SiteSeries>, usize) {
    let before = sites.len();
    let kept: Vec<SiteSeries> = sites.into_iter().filter(|s| s.n_wet() >= min_wet).collect();
    let excluded = before - kept.len();
    (kept, excluded)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Family {
    Egpd(EgpdParams),
    GammaMixture(GammaMixtureParams),
}

/// Recipe for one synthetic site.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorSpec {
    pub family: Family,
    /// Draws before discretization.
    pub n: usize,
    /// Round to the nearest multiple of this many mm (ties to even), then
    /// drop zeros.
    pub discretize_mm: Option<f64>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_WET_DAYS {
            return Err(domain(format!("generator needs n >= {MIN_WET_DAYS}, got {}", self.n)));
        }
        if let Some(step) = self.discretize_mm {
            if !(step > 0.0 && step.is_finite()) {
                return Err(domain("discretization step must be finite and > 0"));
            }
        }
        match &self.family {
            Family::Egpd(p) => EgpdParams::new(p.kappa, p.sigma, p.xi).map(|_| ()),
            Family::GammaMixture(g) => {
                GammaMixtureParams::new(g.weights.clone(), g.shapes.clone(), g.scales.clone()).map(|_| ())
            }
        }
    }

    /// The undiscretized draws, then rounding and zero removal.
    pub fn simulate(&self, site_id: impl Into<String>) -> Result<SiteSeries> {
        self.validate()?;
        let mut rng = RngState::new(self.seed, 0);
        let raw = match &self.family {
            Family::Egpd(p) => p.sample(self.n, &mut rng),
            Family::GammaMixture(g) => g.sample(self.n, &mut rng)?,
        };
        let values = match self.discretize_mm {
            Some(step) => raw.into_iter().map(|y| discretize(y, step)).collect(),
            None => raw,
        };
        Ok(SiteSeries::new(site_id, values, Source::Synthetic)?.with_truth(self.clone()))
    }
}

/// Nearest multiple of `step`, ties to even. When `1 / step` is a whole
/// number `m` the result is `k / m`, the double nearest the decimal value.
pub fn discretize(y: f64, step: f64) -> f64 {
    let k = libm::rint(y / step);
    let m = libm::rint(1.0 / step);
    if m >= 1.0 && libm::fabs(m * step - 1.0) < 1e-12 {
        k / m
    } else {
        k * step
    }
}

/// Simulates each `(site_id, spec)` pair.
pub fn simulate_corpus(specs: &[(String, GeneratorSpec)]) -> Result<Vec<SiteSeries>> {
    specs.iter().map(|(id, spec)| spec.simulate(id.clone())).collect()
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 4] = ["paper-like-50", "egpd-50", "gamma-mixture-50", "egpd-discretized-50"];

const PRESET_STREAM: u64 = 0x636f_7270_7573; // "corpus"

fn uniform_in(rng: &mut RngState, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn log_uniform_in(rng: &mut RngState, lo: f64, hi: f64) -> f64 {
    libm::exp(uniform_in(rng, libm::log(lo), libm::log(hi)))
}

fn count_in(rng: &mut RngState, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

fn random_egpd(rng: &mut RngState) -> Family {
    let kappa = uniform_in(rng, 0.6, 2.0);
    let sigma = log_uniform_in(rng, 2.0, 12.0);
    let xi = uniform_in(rng, 0.05, 0.3);
    Family::Egpd(EgpdParams { kappa, sigma, xi })
}

/// Three components: light drizzle, moderate falls, heavy falls.
fn random_mixture(rng: &mut RngState) -> Family {
    let w = [uniform_in(rng, 0.2, 0.4), uniform_in(rng, 0.3, 0.5), uniform_in(rng, 0.1, 0.3)];
    let total: f64 = w.iter().sum();
    let shapes = alloc::vec![uniform_in(rng, 0.5, 1.0), uniform_in(rng, 1.5, 3.0), uniform_in(rng, 3.0, 6.0)];
    let scales = alloc::vec![log_uniform_in(rng, 0.3, 1.0), log_uniform_in(rng, 1.5, 3.0), log_uniform_in(rng, 3.0, 8.0)];
    Family::GammaMixture(GammaMixtureParams { weights: w.iter().map(|x| x / total).collect(), shapes, scales })
}

/// Generator specs of a named 50-site preset. Site `i` is named `site-NNN`
/// and its parameters depend only on `(seed, i)`.
///
/// - `egpd-50`: EGPD sites, 300 to 600 wet days, continuous values.
/// - `gamma-mixture-50`: three-component gamma mixtures, same sizes.
/// - `egpd-discretized-50`: `egpd-50` rounded to 0.2 mm.
/// - `paper-like-50`: alternating EGPD and mixture sites with 150 to 500
///   draws, rounded to 0.1 or 0.2 mm, wet-day medians of roughly 1 to 10 mm.
///   Illustrative only; not calibrated to any observed network.
pub fn preset(name: &str, seed: u64) -> Result<Vec<(String, GeneratorSpec)>> {
    let sites = 50;
    let mut out = Vec::with_capacity(sites);
    for i in 0..sites {
        let mut rng = RngState::new(seed, derive_stream(PRESET_STREAM, i as u64));
        let (family, n, discretize_mm) = match name {
            "egpd-50" => (random_egpd(&mut rng), count_in(&mut rng, 300, 600), None),
            "gamma-mixture-50" => (random_mixture(&mut rng), count_in(&mut rng, 300, 600), None),
            "egpd-discretized-50" => (random_egpd(&mut rng), count_in(&mut rng, 300, 600), Some(0.2)),
            "paper-like-50" => {
                let family = if i % 2 == 0 { random_egpd(&mut rng) } else { random_mixture(&mut rng) };
                let step = if rng.uniform() < 0.5 { 0.1 } else { 0.2 };
                (family, count_in(&mut rng, 150, 500), Some(step))
            }
            other => return Err(domain(format!("unknown preset `{other}`"))),
        };
        let spec = GeneratorSpec { family, n, discretize_mm, seed: rng.next_u64() };
        out.push((format!("site-{i:03}"), spec));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zeros_are_dropped_and_order_kept() {
        let s = SiteSeries::new("a", vec![0.0, 1.2, 0.0, 3.4], Source::Ingested).unwrap();
        assert_eq!(s.values(), &[1.2, 3.4]);
        assert_eq!(s.n_wet(), 2);
        assert!(matches!(SiteSeries::new("b", vec![0.0; 100], Source::Ingested), Err(Error::EmptyData)));
        assert!(SiteSeries::new("c", vec![1.0, -0.5], Source::Ingested).is_err());
    }

    #[test]
    fn filter_boundary_is_inclusive() {
        let mk = |n: usize| SiteSeries::new(format!("s{n}"), vec![1.0; n], Source::Synthetic).unwrap();
        let (kept, excluded) = filter_corpus(vec![mk(99), mk(100)], MIN_WET_DAYS);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].n_wet(), 100);
        assert_eq!(excluded, 1);
        let (kept, excluded) = filter_corpus(Vec::new(), MIN_WET_DAYS);
        assert!(kept.is_empty());
        assert_eq!(excluded, 0);
    }

    #[test]
    fn discretize_ties_to_even() {
        assert_eq!(discretize(0.25, 0.5), 0.0);
        assert_eq!(discretize(0.75, 0.5), 1.0);
        assert_eq!(discretize(0.33, 0.2), 0.4);
        assert_eq!(discretize(0.61, 0.2), 0.6);
        assert_eq!(discretize(0.71, 0.1), 0.7);
        assert_eq!(discretize(7.4, 2.5), 7.5);
        assert_eq!(discretize(0.5, 1.0), 0.0);
        assert_eq!(discretize(1.5, 1.0), 2.0);
    }

    #[test]
    fn presets_are_named_and_reproducible() {
        for name in PRESETS {
            let a = preset(name, 3).unwrap();
            assert_eq!(a.len(), 50);
            assert_eq!(a, preset(name, 3).unwrap());
            assert!(a.iter().all(|(_, s)| s.validate().is_ok()));
        }
        assert!(preset("nope", 0).is_err());
    }
}
