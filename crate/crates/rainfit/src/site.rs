//! One CSV file per site: header `date,rainfall_mm`, then `YYYY-MM-DD,<mm>`
//! rows. An empty amount is a missing day.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use rainfit_core::corpus::{SiteSeries, Source};
use rainfit_core::Error as CoreError;

use crate::error::{AppError, AppResult};

pub const HEADER: [&str; 2] = ["date", "rainfall_mm"];

/// Reads a site from storage. [`CsvSiteLoader`] handles the bundled format;
/// other layouts plug in here.
pub trait SiteLoader: Sync {
    fn load(&self, site_id: &str, path: &Path) -> AppResult<SiteSeries>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvSiteLoader;

impl SiteLoader for CsvSiteLoader {
    fn load(&self, site_id: &str, path: &Path) -> AppResult<SiteSeries> {
        load_site(site_id, path)
    }
}

/// Parses a site file. Missing and zero amounts are dropped; a malformed row
/// is reported with its line number.
pub fn load_site(site_id: &str, path: &Path) -> AppResult<SiteSeries> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(csv_error(path, e)),
        None => return Err(AppError::data(path, "empty file, expected header `date,rainfall_mm`")),
    };
    if header.iter().map(|f| f.trim_start_matches('\u{feff}')).ne(HEADER) {
        return Err(AppError::data(path, "line 1: expected header `date,rainfall_mm`"));
    }
    let mut raw = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |msg: String| AppError::data(path, format!("line {line}: {msg}"));
        if row.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", row.len())));
        }
        NaiveDate::parse_from_str(&row[0], "%Y-%m-%d").map_err(|_| bad(format!("bad date `{}`", &row[0])))?;
        let amount = row[1].trim();
        if amount.is_empty() {
            continue;
        }
        let v: f64 = amount.parse().map_err(|_| bad(format!("bad rainfall `{amount}`")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad(format!("rainfall must be finite and >= 0, got {amount}")));
        }
        raw.push(v);
    }
    SiteSeries::new(site_id, raw, Source::Ingested).map_err(|e| match e {
        CoreError::EmptyData => AppError::data(path, "no wet days"),
        other => AppError::data(path, other.to_string()),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        _ => AppError::data(path, message),
    }
}

/// Writes `values` on consecutive days from `start`, one row each.
pub fn save_site(path: &Path, start: NaiveDate, values: &[f64]) -> AppResult<()> {
    let io = |e| AppError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{}", HEADER.join(",")).map_err(io)?;
    for (i, v) in values.iter().enumerate() {
        let day = start.checked_add_days(Days::new(i as u64)).unwrap_or(NaiveDate::MAX);
        writeln!(out, "{},{v}", day.format("%Y-%m-%d")).map_err(io)?;
    }
    out.flush().map_err(io)
}
