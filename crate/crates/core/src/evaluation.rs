//! Comparing fitted quantiles with empirical ones.
//!
//! For method `m` at site `s` and level `p`, `D = ln(q_m / q_e)`: zero is a
//! perfect match, positive values overestimate. Across sites each
//! `(method, p)` cell is summarized by its median and interquartile range,
//! and classified as underestimating (`Q3 < 0`), overestimating (`Q1 > 0`) or
//! nominal (the IQR contains 0, endpoints included).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::egpd::EgpdParams;
use crate::empirical::type7_quantile;
use crate::error::{domain, Error, Result};
use crate::fit::FitDiagnostics;
use crate::gamma_mixture::GammaMixtureParams;

/// The seven estimators under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MethodId {
    #[cfg_attr(feature = "serde", serde(rename = "Naveau-MLE"))]
    NaveauMle,
    #[cfg_attr(feature = "serde", serde(rename = "Naveau-PWM"))]
    NaveauPwm,
    #[cfg_attr(feature = "serde", serde(rename = "Naveau-MLE-c"))]
    NaveauMleC,
    #[cfg_attr(feature = "serde", serde(rename = "Naveau-PWM-c"))]
    NaveauPwmC,
    #[cfg_attr(feature = "serde", serde(rename = "Gamma-Mixture-2"))]
    GammaMixture2,
    #[cfg_attr(feature = "serde", serde(rename = "Gamma-Mixture-3"))]
    GammaMixture3,
    #[cfg_attr(feature = "serde", serde(rename = "Gamma-Mixture-4"))]
    GammaMixture4,
}

impl MethodId {
    pub const ALL: [MethodId; 7] = [
        MethodId::NaveauMle,
        MethodId::NaveauPwm,
        MethodId::NaveauMleC,
        MethodId::NaveauPwmC,
        MethodId::GammaMixture2,
        MethodId::GammaMixture3,
        MethodId::GammaMixture4,
    ];

    /// Display name, e.g. `Naveau-MLE-c`.
    pub fn name(self) -> &'static str {
        match self {
            MethodId::NaveauMle => "Naveau-MLE",
            MethodId::NaveauPwm => "Naveau-PWM",
            MethodId::NaveauMleC => "Naveau-MLE-c",
            MethodId::NaveauPwmC => "Naveau-PWM-c",
            MethodId::GammaMixture2 => "Gamma-Mixture-2",
            MethodId::GammaMixture3 => "Gamma-Mixture-3",
            MethodId::GammaMixture4 => "Gamma-Mixture-4",
        }
    }

    /// Identifier form, e.g. `NaveauMleC`.
    pub fn ident(self) -> &'static str {
        match self {
            MethodId::NaveauMle => "NaveauMle",
            MethodId::NaveauPwm => "NaveauPwm",
            MethodId::NaveauMleC => "NaveauMleC",
            MethodId::NaveauPwmC => "NaveauPwmC",
            MethodId::GammaMixture2 => "GammaMixture2",
            MethodId::GammaMixture3 => "GammaMixture3",
            MethodId::GammaMixture4 => "GammaMixture4",
        }
    }

    /// Position in [`MethodId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Mixture component count, `None` for the EGPD methods.
    pub fn components(self) -> Option<usize> {
        match self {
            MethodId::GammaMixture2 => Some(2),
            MethodId::GammaMixture3 => Some(3),
            MethodId::GammaMixture4 => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Accepts the display name or the identifier form, ignoring ASCII case.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        MethodId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s) || m.ident().eq_ignore_ascii_case(s))
            .ok_or_else(|| domain(alloc::format!("unknown method `{s}`")))
    }
}

/// Probability levels at which quantiles are compared.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct QuantileSet {
    probabilities: Vec<f64>,
}

impl QuantileSet {
    pub const PAPER: [f64; 7] = [0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99];

    /// Levels must lie in `(0, 1)` and be strictly ascending.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(domain("quantile set is empty"));
        }
        if probabilities.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(domain("quantile levels must lie in (0, 1)"));
        }
        if probabilities.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("quantile levels must be strictly ascending"));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

impl Default for QuantileSet {
    fn default() -> Self {
        Self { probabilities: Self::PAPER.to_vec() }
    }
}

impl TryFrom<Vec<f64>> for QuantileSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantileSet> for Vec<f64> {
    fn from(q: QuantileSet) -> Self {
        q.probabilities
    }
}

/// Parameters of a fitted model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "kebab-case"))]
pub enum FittedParams {
    Egpd(EgpdParams),
    GammaMixture(GammaMixtureParams),
}

impl FittedParams {
    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            FittedParams::Egpd(e) => e.quantile(p),
            FittedParams::GammaMixture(g) => g.quantile(p),
        }
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        match self {
            FittedParams::Egpd(e) => e.cdf(y),
            FittedParams::GammaMixture(g) => g.cdf(y),
        }
    }
}

/// One `(site, method)` fit. A failed fit has no parameters and carries the
/// error message instead.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub site_id: String,
    pub method: MethodId,
    /// Estimated quantiles (mm), aligned with `probabilities`.
    pub probabilities: Vec<f64>,
    pub estimated_quantiles: Vec<f64>,
    pub converged: bool,
    pub fit_seconds: f64,
    pub params: Option<FittedParams>,
    pub diagnostics: Option<FitDiagnostics>,
    pub error: Option<String>,
}

impl FitResult {
    /// Estimated quantile at level `p`, if it was requested.
    pub fn quantile_at(&self, p: f64) -> Option<f64> {
        self.probabilities.iter().position(|x| *x == p).and_then(|i| self.estimated_quantiles.get(i).copied())
    }
}

/// Empirical quantiles of one site's sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiteQuantiles {
    pub site_id: String,
    pub probabilities: Vec<f64>,
    pub quantiles: Vec<f64>,
}

impl SiteQuantiles {
    pub fn quantile_at(&self, p: f64) -> Option<f64> {
        self.probabilities.iter().position(|x| *x == p).and_then(|i| self.quantiles.get(i).copied())
    }
}

/// `ln(q_m / q_e)`.
pub fn log_ratio_metric(q_m: f64, q_e: f64) -> Result<f64> {
    if !(q_m > 0.0 && q_m.is_finite() && q_e > 0.0 && q_e.is_finite()) {
        return Err(domain("log-ratio metric needs finite quantiles > 0"));
    }
    Ok(libm::log(q_m / q_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Class {
    /// `Q3 < 0`.
    Under,
    /// `Q1 > 0`.
    Over,
    /// The IQR contains 0.
    Nominal,
}

impl Class {
    pub fn letter(self) -> char {
        match self {
            Class::Under => 'U',
            Class::Over => 'O',
            Class::Nominal => 'N',
        }
    }

    fn from_quartiles(q1: f64, q3: f64) -> Self {
        if q3 < 0.0 {
            Class::Under
        } else if q1 > 0.0 {
            Class::Over
        } else {
            Class::Nominal
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Minimum number of values [`classify`] accepts.
pub const MIN_CLASSIFY: usize = 4;

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(domain("values must be finite"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// U/O/N class from the type-7 quartiles of `d_values` (at least four).
pub fn classify(d_values: &[f64]) -> Result<Class> {
    if d_values.len() < MIN_CLASSIFY {
        return Err(Error::InsufficientData { needed: MIN_CLASSIFY, got: d_values.len() });
    }
    let sorted = sorted_finite(d_values)?;
    let q1 = type7_quantile(&sorted, 0.25)?;
    let q3 = type7_quantile(&sorted, 0.75)?;
    Ok(Class::from_quartiles(q1, q3))
}

/// Summary of the D values of one `(method, p)` cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryCell {
    pub p: f64,
    /// `None` when no site contributed a value.
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub class: Option<Class>,
    /// Sites contributing a D value.
    pub n_sites: usize,
    /// Sites dropped at this level because a quantile was missing or not
    /// positive.
    pub n_excluded: usize,
    /// Fewer than [`MIN_CLASSIFY`] values: quartiles are still type-7, but
    /// the class rests on very little data.
    pub sparse: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryRow {
    pub method: MethodId,
    pub cells: Vec<SummaryCell>,
    /// Sites whose fit failed or did not converge.
    pub n_failed: usize,
    pub n_fits: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationSummary {
    pub probabilities: Vec<f64>,
    /// One row per method present in the results, in [`MethodId`] order.
    pub rows: Vec<SummaryRow>,
}

impl EvaluationSummary {
    pub fn row(&self, method: MethodId) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn cell(&self, method: MethodId, p: f64) -> Option<&SummaryCell> {
        self.row(method)?.cells.iter().find(|c| c.p == p)
    }
}

/// D values per `(method, p)`: for each method in [`MethodId`] order, one
/// vector per level in `qset`, with sites in `site_id` order.
///
/// Also returns, per method, `(failed fits, total fits)` and per cell the
/// number of excluded sites.
fn collect_d_values(
    results: &[FitResult],
    empirical: &[SiteQuantiles],
    qset: &QuantileSet,
) -> BTreeMap<MethodId, (Vec<Vec<f64>>, Vec<usize>, usize, usize)> {
    let by_site: BTreeMap<&str, &SiteQuantiles> = empirical.iter().map(|s| (s.site_id.as_str(), s)).collect();
    let mut ordered: Vec<&FitResult> = results.iter().collect();
    ordered.sort_by(|a, b| (a.method, &a.site_id).cmp(&(b.method, &b.site_id)));

    let levels = qset.len();
    let mut out: BTreeMap<MethodId, (Vec<Vec<f64>>, Vec<usize>, usize, usize)> = BTreeMap::new();
    for r in ordered {
        let entry = out
            .entry(r.method)
            .or_insert_with(|| (alloc::vec![Vec::new(); levels], alloc::vec![0; levels], 0, 0));
        entry.3 += 1;
        if !r.converged {
            entry.2 += 1;
            continue;
        }
        let site = by_site.get(r.site_id.as_str());
        for (i, &p) in qset.probabilities().iter().enumerate() {
            let d = match (r.quantile_at(p), site.and_then(|s| s.quantile_at(p))) {
                (Some(q_m), Some(q_e)) => log_ratio_metric(q_m, q_e).ok(),
                _ => None,
            };
            match d {
                Some(d) => entry.0[i].push(d),
                None => entry.1[i] += 1,
            }
        }
    }
    out
}

/// Per-`(method, p)` medians, quartiles and classes of D over sites.
///
/// Failed fits are excluded and counted per method; sites lacking a positive
/// empirical or fitted quantile at some `p` are excluded at that `p` only.
/// The result does not depend on the order of `results` or `empirical`.
pub fn summarize(results: &[FitResult], empirical: &[SiteQuantiles], qset: &QuantileSet) -> Result<EvaluationSummary> {
    if results.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut rows = Vec::new();
    for (method, (d_values, excluded, n_failed, n_fits)) in collect_d_values(results, empirical, qset) {
        let mut cells = Vec::with_capacity(qset.len());
        for ((&p, values), n_excluded) in qset.probabilities().iter().zip(d_values).zip(excluded) {
            let mut cell = SummaryCell {
                p,
                median: None,
                q1: None,
                q3: None,
                class: None,
                n_sites: values.len(),
                n_excluded,
                sparse: values.len() < MIN_CLASSIFY,
            };
            if !values.is_empty() {
                let sorted = sorted_finite(&values)?;
                let q1 = type7_quantile(&sorted, 0.25)?;
                let q3 = type7_quantile(&sorted, 0.75)?;
                cell.median = Some(type7_quantile(&sorted, 0.5)?);
                cell.q1 = Some(q1);
                cell.q3 = Some(q3);
                cell.class = Some(Class::from_quartiles(q1, q3));
            }
            cells.push(cell);
        }
        rows.push(SummaryRow { method, cells, n_failed, n_fits });
    }
    Ok(EvaluationSummary { probabilities: qset.probabilities().to_vec(), rows })
}

/// Five-number summary plus 1.5·IQR whiskers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxplotStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Smallest value at or above `q1 - 1.5 IQR`.
    pub lower_whisker: f64,
    /// Largest value at or below `q3 + 1.5 IQR`.
    pub upper_whisker: f64,
    /// Values outside the whiskers.
    pub n_outliers: usize,
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    let sorted = sorted_finite(values)?;
    let q1 = type7_quantile(&sorted, 0.25)?;
    let median = type7_quantile(&sorted, 0.5)?;
    let q3 = type7_quantile(&sorted, 0.75)?;
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence).collect();
    Ok(BoxplotStats {
        n: sorted.len(),
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        lower_whisker: inside.first().copied().unwrap_or(q1),
        upper_whisker: inside.last().copied().unwrap_or(q3),
        n_outliers: sorted.len() - inside.len(),
    })
}

/// Boxplot statistics of D for every `(method, p)` cell with data, in
/// [`MethodId`] then `p` order.
pub fn boxplot_table(
    results: &[FitResult],
    empirical: &[SiteQuantiles],
    qset: &QuantileSet,
) -> Result<Vec<(MethodId, f64, BoxplotStats)>> {
    let mut out = Vec::new();
    for (method, (d_values, ..)) in collect_d_values(results, empirical, qset) {
        for (&p, values) in qset.probabilities().iter().zip(d_values) {
            if !values.is_empty() {
                out.push((method, p, boxplot_stats(&values)?));
            }
        }
    }
    Ok(out)
}

/// Default scale of [`asinh_axis_transform`].
pub const ASINH_SCALE: f64 = 8.0;

/// `asinh(scale x)`: odd, monotone, linear near zero and logarithmic in the
/// tails.
pub fn asinh_axis_transform(x: f64, scale: f64) -> f64 {
    libm::asinh(scale * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn metric_examples() {
        assert_eq!(log_ratio_metric(2.0, 2.0).unwrap(), 0.0);
        assert!((log_ratio_metric(2.0 * core::f64::consts::E, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((log_ratio_metric(1.0, 2.0).unwrap() + core::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_ratio_metric(0.0, 2.0).is_err());
        assert!(log_ratio_metric(1.0, -2.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[-0.1; 5]).unwrap(), Class::Under);
        assert_eq!(classify(&[-1.0, -0.5, 0.5, 1.0]).unwrap(), Class::Nominal);
        assert_eq!(classify(&[0.2; 4]).unwrap(), Class::Over);
        assert!(classify(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn classify_counts_zero_endpoints_as_nominal() {
        // Q3 = 0 exactly
        assert_eq!(classify(&[-3.0, -2.0, -1.0, 0.0, 0.0]).unwrap(), Class::Nominal);
        // Q1 = 0 exactly
        assert_eq!(classify(&[0.0, 0.0, 1.0, 2.0, 3.0]).unwrap(), Class::Nominal);
    }

    #[test]
    fn method_names_round_trip() {
        for m in MethodId::ALL {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
            assert_eq!(m.ident().parse::<MethodId>().unwrap(), m);
            assert_eq!(MethodId::ALL[m.index()], m);
        }
        assert_eq!(MethodId::NaveauMleC.to_string(), "Naveau-MLE-c");
        assert!("Naveau".parse::<MethodId>().is_err());
    }

    #[test]
    fn quantile_set_validates() {
        assert!(QuantileSet::new(vec![0.5, 0.5]).is_err());
        assert!(QuantileSet::new(vec![0.0, 0.5]).is_err());
        assert!(QuantileSet::new(vec![]).is_err());
        assert_eq!(QuantileSet::default().len(), 7);
    }

    #[test]
    fn asinh_examples() {
        assert_eq!(asinh_axis_transform(0.0, ASINH_SCALE), 0.0);
        let a = asinh_axis_transform(0.3, ASINH_SCALE);
        assert_eq!(asinh_axis_transform(-0.3, ASINH_SCALE), -a);
        assert!((asinh_axis_transform(1.0, ASINH_SCALE) - 2.776_472_280_723_717_7).abs() < 1e-15);
    }

    #[test]
    fn boxplot_whiskers() {
        let mut v: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        v.push(100.0);
        let b = boxplot_stats(&v).unwrap();
        assert_eq!(b.q1, 3.25);
        assert_eq!(b.q3, 7.75);
        assert_eq!(b.upper_whisker, 9.0);
        assert_eq!(b.lower_whisker, 1.0);
        assert_eq!(b.n_outliers, 1);
        assert_eq!(b.max, 100.0);
    }
}
