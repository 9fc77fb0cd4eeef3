//! Tables, boxplot statistics and plots from fit records.
//!
//! CSV tables keep D in natural-log units. The text median table shows
//! values ×10⁻³, i.e. multiplied by 1000 and rounded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rainfit_core::evaluation::{boxplot_table, summarize, BoxplotStats, EvaluationSummary, FitResult, MethodId, QuantileSet, SiteQuantiles};

use crate::error::{AppError, AppResult};
use crate::svg::boxplot_svg;

pub const TABLE1_CSV: &str = "table1_median_d.csv";
pub const TABLE1_TXT: &str = "table1_median_d.txt";
pub const TABLE2_CSV: &str = "table2_classes.csv";
pub const TABLE2_TXT: &str = "table2_classes.txt";
pub const BOXPLOT_CSV: &str = "boxplot_stats.csv";

fn p_label(p: f64) -> String {
    format!("p{p}")
}

fn csv_header(first: &str, qset: &QuantileSet, last: &[&str]) -> String {
    let mut line = first.to_string();
    for &p in qset.probabilities() {
        line.push(',');
        line.push_str(&p_label(p));
    }
    for col in last {
        line.push(',');
        line.push_str(col);
    }
    line.push('\n');
    line
}

/// Median D per method and level, natural units, with failure counts.
pub fn table1_csv(summary: &EvaluationSummary, qset: &QuantileSet) -> String {
    let mut out = csv_header("method", qset, &["n_failed", "n_fits"]);
    for row in &summary.rows {
        out.push_str(row.method.name());
        for c in &row.cells {
            out.push(',');
            if let Some(m) = c.median {
                let _ = write!(out, "{m}");
            }
        }
        let _ = writeln!(out, ",{},{}", row.n_failed, row.n_fits);
    }
    out
}

/// U/O/N per method and level; empty where no site contributed.
pub fn table2_csv(summary: &EvaluationSummary, qset: &QuantileSet) -> String {
    let mut out = csv_header("method", qset, &[]);
    for row in &summary.rows {
        out.push_str(row.method.name());
        for c in &row.cells {
            out.push(',');
            if let Some(class) = c.class {
                out.push(class.letter());
            }
        }
        out.push('\n');
    }
    out
}

fn text_table(title: &str, qset: &QuantileSet, rows: Vec<(String, Vec<String>)>) -> String {
    let name_width = rows.iter().map(|(n, _)| n.len()).chain(["method".len()]).max().unwrap_or(6);
    let labels: Vec<String> = qset.probabilities().iter().map(|p| p.to_string()).collect();
    let width = rows
        .iter()
        .flat_map(|(_, cells)| cells.iter().map(String::len))
        .chain(labels.iter().map(String::len))
        .max()
        .unwrap_or(4)
        .max(4);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<name_width$}", "method");
    for l in &labels {
        let _ = write!(out, "  {l:>width$}");
    }
    out.push('\n');
    for (name, cells) in rows {
        let _ = write!(out, "{name:<name_width$}");
        for c in cells {
            let _ = write!(out, "  {c:>width$}");
        }
        out.push('\n');
    }
    out
}

pub fn table1_text(summary: &EvaluationSummary, qset: &QuantileSet) -> String {
    let rows = summary
        .rows
        .iter()
        .map(|r| {
            let cells = r
                .cells
                .iter()
                .map(|c| c.median.map_or_else(|| "-".to_string(), |m| format!("{:.0}", m * 1000.0)))
                .collect();
            (r.method.name().to_string(), cells)
        })
        .collect();
    text_table("Median D by quantile level (values x 10^-3)", qset, rows)
}

pub fn table2_text(summary: &EvaluationSummary, qset: &QuantileSet) -> String {
    let rows = summary
        .rows
        .iter()
        .map(|r| {
            let cells = r
                .cells
                .iter()
                .map(|c| match (c.class, c.sparse) {
                    (Some(class), false) => class.letter().to_string(),
                    (Some(class), true) => format!("{}*", class.letter()),
                    (None, _) => "-".to_string(),
                })
                .collect();
            (r.method.name().to_string(), cells)
        })
        .collect();
    let mut out = text_table("IQR of D: U below 0, O above 0, N contains 0", qset, rows);
    if summary.rows.iter().flat_map(|r| &r.cells).any(|c| c.sparse && c.class.is_some()) {
        out.push_str("* fewer than 4 sites\n");
    }
    out
}

pub fn boxplot_csv(table: &[(MethodId, f64, BoxplotStats)]) -> String {
    let mut out =
        String::from("method,p,n,min,lower_whisker,q1,median,q3,upper_whisker,max,n_outliers\n");
    for (m, p, s) in table {
        let _ = writeln!(
            out,
            "{},{p},{},{},{},{},{},{},{},{},{}",
            m.name(),
            s.n,
            s.min,
            s.lower_whisker,
            s.q1,
            s.median,
            s.q3,
            s.upper_whisker,
            s.max,
            s.n_outliers
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> AppResult<()> {
    std::fs::write(path, contents).map_err(|e| AppError::io(path, e))
}

/// Writes every table into `dir` and, with `svg`, one boxplot per level.
/// Returns the paths written.
pub fn write_report(
    dir: &Path,
    results: &[FitResult],
    empirical: &[SiteQuantiles],
    qset: &QuantileSet,
    svg: bool,
) -> AppResult<Vec<PathBuf>> {
    let summary = summarize(results, empirical, qset).map_err(|e| AppError::Fit(format!("summary: {e}")))?;
    let boxes = boxplot_table(results, empirical, qset).map_err(|e| AppError::Fit(format!("boxplots: {e}")))?;
    let mut written = Vec::new();
    let mut emit = |name: String, contents: String| -> AppResult<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    emit(TABLE1_CSV.into(), table1_csv(&summary, qset))?;
    emit(TABLE1_TXT.into(), table1_text(&summary, qset))?;
    emit(TABLE2_CSV.into(), table2_csv(&summary, qset))?;
    emit(TABLE2_TXT.into(), table2_text(&summary, qset))?;
    emit(BOXPLOT_CSV.into(), boxplot_csv(&boxes))?;
    if svg {
        for &p in qset.probabilities() {
            let cells: Vec<(MethodId, BoxplotStats)> =
                boxes.iter().filter(|(_, q, _)| *q == p).map(|(m, _, s)| (*m, *s)).collect();
            emit(format!("boxplot_{}.svg", p_label(p)), boxplot_svg(p, &cells))?;
        }
    }
    Ok(written)
}
