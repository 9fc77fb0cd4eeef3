//! The four subcommands as library calls. Warnings are returned rather than
//! printed.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rainfit_core::corpus::Source;
use rainfit_core::evaluation::{FitResult, MethodId, QuantileSet, SiteQuantiles};

use crate::error::{AppError, AppResult};
use crate::manifest::{Manifest, ManifestSite, SiteEntry, SiteSource};
use crate::records::{read_json, read_jsonl, write_json, write_jsonl};
use crate::report::write_report;
use crate::run::{empirical_quantiles, fit_one, run_fits, IndexedSite, RunConfig};
use crate::site::{save_site, CsvSiteLoader, SiteLoader};

pub const FITS_FILE: &str = "fits.jsonl";
pub const EMPIRICAL_FILE: &str = "empirical.jsonl";
pub const RUN_FILE: &str = "run.json";
pub const SITES_FILE: &str = "sites.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// First day written to simulated site files.
pub fn simulation_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).unwrap_or_default()
}

fn create_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

/// Fits one method to one site file.
pub fn fit_site(path: &Path, method: MethodId, config: &RunConfig) -> AppResult<FitResult> {
    config.validate()?;
    let id = path.file_stem().map_or_else(|| "site".to_string(), |s| s.to_string_lossy().into_owned());
    let site = CsvSiteLoader.load(&id, path)?;
    Ok(fit_one(&site, 0, method, config))
}

/// Writes `<id>.csv` and `<id>.truth.json` per generated site plus a
/// manifest listing the files.
pub fn simulate(manifest: &Manifest, base: &Path, out: &Path) -> AppResult<Vec<PathBuf>> {
    let entries = manifest.resolve(base)?;
    create_dir(out)?;
    let mut listed = Vec::new();
    let mut written = Vec::new();
    for entry in &entries {
        let SiteSource::Generated(spec) = &entry.source else {
            return Err(AppError::config(format!("site `{}` is a file; simulate needs generators", entry.id)));
        };
        let series = entry.materialize(&CsvSiteLoader)?;
        let csv = out.join(format!("{}.csv", entry.id));
        save_site(&csv, simulation_start(), series.values())?;
        let truth = out.join(format!("{}.truth.json", entry.id));
        write_json(&truth, spec)?;
        listed.push(ManifestSite { id: entry.id.clone(), path: Some(format!("{}.csv", entry.id).into()), generator: None });
        written.push(csv);
        written.push(truth);
    }
    let path = out.join(MANIFEST_FILE);
    write_json(&path, &Manifest { seed: manifest.seed, preset: None, sites: listed })?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub fits: usize,
    pub converged: usize,
    pub sites_used: usize,
    pub sites_excluded: usize,
    pub warnings: Vec<String>,
}

/// Loads or simulates every site, fits the grid and writes records and
/// tables into `out`. Unreadable site data and sparse sites are skipped with
/// a warning; only configuration and IO problems abort.
pub fn benchmark(manifest: &Manifest, base: &Path, config: &RunConfig, jobs: usize, out: &Path, svg: bool) -> AppResult<BenchmarkOutcome> {
    config.validate()?;
    let entries = manifest.resolve(base)?;
    create_dir(out)?;
    let mut warnings = Vec::new();
    let mut sites = Vec::new();
    let mut status_rows = Vec::new();
    for (index, entry) in entries.iter().enumerate() {
        let (source, n_wet, status) = match load_entry(entry) {
            Ok(series) if series.n_wet() >= config.min_wet => {
                let row = (source_name(series.source), series.n_wet().to_string(), "included".to_string());
                sites.push(IndexedSite { index, series });
                row
            }
            Ok(series) => {
                warnings.push(format!("site `{}`: {} wet days, below {}", entry.id, series.n_wet(), config.min_wet));
                (source_name(series.source), series.n_wet().to_string(), "too-few-wet-days".to_string())
            }
            Err(AppError::Data { path, message }) => {
                warnings.push(format!("site `{}` skipped: {}: {message}", entry.id, path.display()));
                ("", String::new(), format!("data-error: {message}"))
            }
            Err(e) => return Err(e),
        };
        status_rows.push([entry.id.clone(), source.to_string(), n_wet, status]);
    }
    write_sites(&out.join(SITES_FILE), &status_rows)?;
    write_json(&out.join(RUN_FILE), config)?;

    let empirical: Vec<SiteQuantiles> =
        sites.iter().map(|s| empirical_quantiles(&s.series, &config.quantiles)).collect::<AppResult<_>>()?;
    let results = run_fits(&sites, config, jobs)?;
    write_jsonl(&out.join(FITS_FILE), &results)?;
    write_jsonl(&out.join(EMPIRICAL_FILE), &empirical)?;
    if !results.is_empty() {
        write_report(out, &results, &empirical, &config.quantiles, svg)?;
    }
    Ok(BenchmarkOutcome {
        fits: results.len(),
        converged: results.iter().filter(|r| r.converged).count(),
        sites_used: sites.len(),
        sites_excluded: entries.len() - sites.len(),
        warnings,
    })
}

fn load_entry(entry: &SiteEntry) -> AppResult<rainfit_core::corpus::SiteSeries> {
    entry.materialize(&CsvSiteLoader)
}

fn source_name(source: Source) -> &'static str {
    match source {
        Source::Ingested => "ingested",
        Source::Synthetic => "synthetic",
    }
}

fn write_sites(path: &Path, rows: &[[String; 4]]) -> AppResult<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["site_id", "source", "n_wet", "status"]).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Options of [`report`]. `None` fields fall back to the run's `run.json`
/// when present, else to all methods and the default levels.
#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub empirical: Option<PathBuf>,
    pub quantiles: Option<QuantileSet>,
    pub methods: Option<Vec<MethodId>>,
    pub svg: bool,
}

/// Rebuilds the tables from a records file without refitting.
pub fn report(records: &Path, out: &Path, options: &ReportOptions) -> AppResult<Vec<String>> {
    let dir = records.parent().unwrap_or(Path::new("."));
    let run_path = dir.join(RUN_FILE);
    let run: Option<RunConfig> = if run_path.exists() { Some(read_json(&run_path)?) } else { None };
    let empirical_path = options.empirical.clone().unwrap_or_else(|| dir.join(EMPIRICAL_FILE));
    let qset = options
        .quantiles
        .clone()
        .or_else(|| run.as_ref().map(|r| r.quantiles.clone()))
        .unwrap_or_default();
    let methods = options
        .methods
        .clone()
        .or_else(|| run.as_ref().map(|r| r.methods.clone()))
        .unwrap_or_else(|| MethodId::ALL.to_vec());

    let mut results: Vec<FitResult> = read_jsonl(records)?;
    let empirical: Vec<SiteQuantiles> = read_jsonl(&empirical_path)?;
    results.retain(|r| methods.contains(&r.method));
    let mut warnings = Vec::new();
    for m in &methods {
        if !results.iter().any(|r| r.method == *m) {
            warnings.push(format!("no records for {m}; its row is omitted"));
        }
    }
    for &p in qset.probabilities() {
        if empirical.iter().any(|e| e.quantile_at(p).is_none()) {
            warnings.push(format!("level {p} is missing from some empirical records; those sites are excluded there"));
        }
    }
    if results.is_empty() {
        return Err(AppError::config(format!("{}: no records for the selected methods", records.display())));
    }
    create_dir(out)?;
    write_report(out, &results, &empirical, &qset, options.svg)?;
    Ok(warnings)
}
