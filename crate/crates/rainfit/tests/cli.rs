use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rainfit::exit;
use rainfit_core::evaluation::FitResult;
use rainfit_core::DiagnosticFlag;

fn rainfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rainfit")).args(args).output().unwrap()
}

fn code(out: &Output) -> u8 {
    out.status.code().unwrap() as u8
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Six small generator sites: four EGPD, two gamma mixtures.
fn small_manifest(dir: &Path) -> PathBuf {
    let mut sites = Vec::new();
    for i in 0..4 {
        sites.push(format!(
            r#"{{"id":"e{i}","generator":{{"kind":"egpd","kappa":{},"sigma":4.0,"xi":0.15,"n":400,"discretize_mm":0.1}}}}"#,
            0.8 + 0.3 * i as f64
        ));
    }
    for i in 0..2 {
        sites.push(format!(
            r#"{{"id":"g{i}","generator":{{"kind":"gamma-mixture","weights":[0.4,0.6],"shapes":[0.7,3.0],"scales":[1.0,2.5],"n":400}}}}"#
        ));
    }
    let path = dir.join("corpus.json");
    std::fs::write(&path, format!(r#"{{"seed":5,"sites":[{}]}}"#, sites.join(","))).unwrap();
    path
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

const TABLES: [&str; 5] =
    ["table1_median_d.csv", "table1_median_d.txt", "table2_classes.csv", "table2_classes.txt", "boxplot_stats.csv"];

#[test]
fn simulate_then_fit_one_site() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"{"seed":3,"sites":[{"id":"big","generator":{"kind":"egpd","kappa":2.0,"sigma":5.0,"xi":0.2,"n":5000}},
            {"id":"small","generator":{"kind":"egpd","kappa":2.0,"sigma":5.0,"xi":0.2,"n":120}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("sim");
    let run = rainfit(&["simulate", "--manifest", s(&manifest), "--out", s(&out)]);
    assert_eq!(code(&run), exit::OK, "{}", String::from_utf8_lossy(&run.stderr));
    for f in ["big.csv", "big.truth.json", "small.csv", "small.truth.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let run = rainfit(&["fit", "--site", s(&out.join("big.csv")), "--method", "Naveau-MLE"]);
    assert_eq!(code(&run), exit::OK, "{}", String::from_utf8_lossy(&run.stderr));
    let record: FitResult = serde_json::from_slice(&run.stdout).unwrap();
    assert!(record.converged);
    assert_eq!(record.site_id, "big");
    assert_eq!(record.estimated_quantiles.len(), 7);
    assert!(record.estimated_quantiles.windows(2).all(|w| w[0] < w[1]));

    let target = dir.path().join("gm4.json");
    let run = rainfit(&["fit", "--site", s(&out.join("small.csv")), "--method", "gamma-mixture-4", "--out", s(&target)]);
    assert!(matches!(code(&run), exit::OK | exit::FIT_FAILED));
    let record: FitResult = serde_json::from_slice(&read(&target)).unwrap();
    assert_eq!(record.estimated_quantiles.len(), 7);
    assert!(record.diagnostics.unwrap().has_flag(DiagnosticFlag::SmallSample));
}

#[test]
fn fit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&rainfit(&["fit", "--site", s(&empty), "--method", "Naveau-MLE"])), exit::DATA);
    let dry = dir.path().join("dry.csv");
    std::fs::write(&dry, "date,rainfall_mm\n2000-01-01,0\n").unwrap();
    assert_eq!(code(&rainfit(&["fit", "--site", s(&dry), "--method", "Naveau-MLE"])), exit::DATA);
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&rainfit(&["fit", "--site", s(&missing), "--method", "Naveau-MLE"])), exit::IO);
    assert_eq!(code(&rainfit(&["fit", "--site", s(&dry), "--method", "Naveau-XYZ"])), exit::CONFIG);
    let args = ["fit", "--site", s(&dry), "--method", "Naveau-MLE", "--threshold-mm", "0"];
    assert_eq!(code(&rainfit(&args)), exit::CONFIG);
    let args = ["fit", "--site", s(&dry), "--method", "Naveau-MLE", "--quantiles", "0.5,0.2"];
    assert_eq!(code(&rainfit(&args)), exit::CONFIG);
}

#[test]
fn benchmark_is_deterministic_and_report_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_manifest(dir.path());
    let methods = "Naveau-MLE,Naveau-PWM,Gamma-Mixture-2";
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let run = rainfit(&["benchmark", "--manifest", s(&manifest), "--methods", methods, "--jobs", jobs, "--out", s(out), "--svg"]);
        assert_eq!(code(&run), exit::OK, "{}", String::from_utf8_lossy(&run.stderr));
    }
    for f in TABLES.iter().chain(&["sites.csv", "empirical.jsonl", "run.json", "boxplot_p0.5.svg"]) {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let fits: Vec<FitResult> = String::from_utf8(read(&a.join("fits.jsonl")))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(fits.len(), 18);
    assert_eq!(fits[0].site_id, "e0");
    assert_eq!(fits[17].site_id, "g1");

    let table1 = String::from_utf8(read(&a.join("table1_median_d.csv"))).unwrap();
    assert_eq!(table1.lines().count(), 4);
    assert!(table1.starts_with("method,p0.01,p0.1,p0.25,p0.5,p0.75,p0.9,p0.99,n_failed,n_fits\n"));

    let rep = dir.path().join("rep");
    let run = rainfit(&["report", "--records", s(&a.join("fits.jsonl")), "--out", s(&rep), "--svg"]);
    assert_eq!(code(&run), exit::OK, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(run.stderr.is_empty(), "{}", String::from_utf8_lossy(&run.stderr));
    for f in TABLES.iter().chain(&["boxplot_p0.01.svg"]) {
        assert_eq!(read(&a.join(f)), read(&rep.join(f)), "{f}");
    }

    let one = dir.path().join("one");
    let run = rainfit(&[
        "report", "--records", s(&a.join("fits.jsonl")), "--out", s(&one), "--quantiles", "0.5", "--methods", "Naveau-MLE,Naveau-MLE-c",
    ]);
    assert_eq!(code(&run), exit::OK);
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("Naveau-MLE-c") && stderr.contains("omitted"), "{stderr}");
    let t1 = String::from_utf8(read(&one.join("table1_median_d.csv"))).unwrap();
    let t2 = String::from_utf8(read(&one.join("table2_classes.csv"))).unwrap();
    assert_eq!(t1.lines().next(), Some("method,p0.5,n_failed,n_fits"));
    assert_eq!(t1.lines().count(), 2);
    assert_eq!(t2.lines().next(), Some("method,p0.5"));
    assert!(t2.lines().nth(1).unwrap().starts_with("Naveau-MLE,"));
}

#[test]
fn single_method_gives_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_manifest(dir.path());
    let out = dir.path().join("pwm");
    let run = rainfit(&["benchmark", "--manifest", s(&manifest), "--methods", "Naveau-PWM", "--out", s(&out)]);
    assert_eq!(code(&run), exit::OK);
    for f in ["table1_median_d.csv", "table2_classes.csv"] {
        let t = String::from_utf8(read(&out.join(f))).unwrap();
        assert_eq!(t.lines().count(), 2, "{t}");
        assert!(t.lines().nth(1).unwrap().starts_with("Naveau-PWM,"));
    }
}

#[test]
fn sparse_and_broken_sites_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("few.csv"), "date,rainfall_mm\n2000-01-01,1.5\n2000-01-02,2.0\n").unwrap();
    std::fs::write(dir.path().join("bad.csv"), "date,rainfall_mm\n2000-01-01,wet\n").unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"{"sites":[{"id":"few","path":"few.csv"},{"id":"bad","path":"bad.csv"},
            {"id":"ok","generator":{"kind":"egpd","kappa":1.0,"sigma":3.0,"xi":0.1,"n":300}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let run = rainfit(&["benchmark", "--manifest", s(&manifest), "--methods", "Naveau-MLE", "--out", s(&out)]);
    assert_eq!(code(&run), exit::OK, "{}", String::from_utf8_lossy(&run.stderr));
    let sites = String::from_utf8(read(&out.join("sites.csv"))).unwrap();
    assert!(sites.contains("few,ingested,2,too-few-wet-days"), "{sites}");
    assert!(sites.contains("bad,,,data-error: line 2: bad rainfall `wet`"), "{sites}");
    assert!(sites.contains("ok,synthetic,300,included"), "{sites}");
}

#[test]
fn benchmark_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&rainfit(&["benchmark", "--manifest", s(&missing), "--out", s(&out)])), exit::IO);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&rainfit(&["benchmark", "--manifest", s(&bad), "--out", s(&out)])), exit::CONFIG);
    assert_eq!(code(&rainfit(&["benchmark", "--preset", "nope", "--out", s(&out)])), exit::CONFIG);
    let run = rainfit(&["benchmark", "--preset", "egpd-50", "--methods", "Naveau-MLE", "--jobs", "0", "--out", s(&out)]);
    assert_eq!(code(&run), exit::CONFIG);

    // a single one-day site: its only fit fails
    let file_only = dir.path().join("files.json");
    std::fs::write(dir.path().join("x.csv"), "date,rainfall_mm\n2000-01-01,1.5\n").unwrap();
    std::fs::write(&file_only, r#"{"sites":[{"id":"x","path":"x.csv"}]}"#).unwrap();
    let run = rainfit(&["benchmark", "--manifest", s(&file_only), "--methods", "Naveau-MLE", "--min-wet", "1", "--out", s(&out)]);
    assert_eq!(code(&run), exit::FIT_FAILED, "{}", String::from_utf8_lossy(&run.stderr));
    let run = rainfit(&["simulate", "--manifest", s(&file_only), "--out", s(&out)]);
    assert_eq!(code(&run), exit::CONFIG);
}

#[test]
fn preset_simulation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let run = rainfit(&["simulate", "--preset", "paper-like-50", "--seed", "4", "--out", s(out)]);
        assert_eq!(code(&run), exit::OK);
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 101);
    for name in names {
        assert_eq!(read(&a.join(&name)), read(&b.join(&name)), "{name:?}");
    }
    for i in 0..50 {
        let site = rainfit::site::load_site("s", &a.join(format!("site-{i:03}.csv"))).unwrap();
        assert!(site.n_wet() >= 100, "site {i}: {}", site.n_wet());
    }
}
