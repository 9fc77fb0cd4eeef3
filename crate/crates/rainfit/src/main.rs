use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rainfit::commands::{self, ReportOptions};
use rainfit::manifest::Manifest;
use rainfit::run::{RunConfig, DEFAULT_TIMEOUT_SECS};
use rainfit::{exit, AppError, AppResult};
use rainfit_core::evaluation::{MethodId, QuantileSet};

#[derive(Parser)]
#[command(name = "rainfit", version, about = "Fit and benchmark wet-day rainfall distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method to one site file and print the record as JSON.
    Fit(FitArgs),
    /// Write synthetic site files from a manifest or preset.
    Simulate(SimulateArgs),
    /// Fit every site with every method and write records and tables.
    Benchmark(BenchmarkArgs),
    /// Rebuild tables and plots from existing records.
    Report(ReportArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus manifest (JSON).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    manifest: Option<PathBuf>,
    /// Built-in synthetic corpus, seeded by --seed.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct FitSettings {
    /// Censoring threshold for the censored estimators (mm).
    #[arg(long, default_value_t = 1.0)]
    threshold_mm: f64,
    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    quantiles: Option<Vec<f64>>,
    /// Seeds optimizer restarts (and presets).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jittered restarts per EGPD fit.
    #[arg(long, default_value_t = 4)]
    egpd_restarts: usize,
    /// Starts per gamma-mixture fit.
    #[arg(long, default_value_t = 8)]
    mixture_restarts: usize,
    /// Per-fit time budget in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    timeout_secs: f64,
}

#[derive(Args)]
struct FitArgs {
    /// Site file (CSV with header `date,rainfall_mm`).
    #[arg(long)]
    site: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: MethodId,
    #[command(flatten)]
    settings: FitSettings,
    /// Write the record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Seed of --preset.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Methods, comma separated (default: all seven).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<MethodId>>,
    #[command(flatten)]
    settings: FitSettings,
    /// Sites need at least this many wet days.
    #[arg(long, default_value_t = 100)]
    min_wet: usize,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also draw one boxplot SVG per quantile level.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Fit records (`fits.jsonl` from a benchmark).
    #[arg(long)]
    records: PathBuf,
    /// Empirical quantiles (default: `empirical.jsonl` beside the records).
    #[arg(long)]
    empirical: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<MethodId>>,
    #[arg(long, value_delimiter = ',')]
    quantiles: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: bool,
}

fn parse_method(s: &str) -> Result<MethodId, String> {
    MethodId::from_str(s.trim()).map_err(|e| e.to_string())
}

fn quantile_set(levels: Option<Vec<f64>>) -> AppResult<Option<QuantileSet>> {
    levels.map(|v| QuantileSet::new(v).map_err(|e| AppError::config(format!("--quantiles: {e}")))).transpose()
}

fn run_config(settings: FitSettings, methods: Option<Vec<MethodId>>, min_wet: usize) -> AppResult<RunConfig> {
    let config = RunConfig {
        methods: methods.unwrap_or_else(|| MethodId::ALL.to_vec()),
        quantiles: quantile_set(settings.quantiles)?.unwrap_or_default(),
        threshold_mm: settings.threshold_mm,
        egpd_restarts: settings.egpd_restarts,
        mixture_restarts: settings.mixture_restarts,
        seed: settings.seed,
        min_wet,
        timeout_secs: settings.timeout_secs,
    };
    config.validate()?;
    Ok(config)
}

fn corpus(args: &CorpusArgs, seed: u64) -> AppResult<(Manifest, PathBuf)> {
    match (&args.manifest, &args.preset) {
        (Some(path), _) => {
            let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            Ok((Manifest::load(path)?, base))
        }
        (None, Some(name)) => Ok((Manifest::for_preset(name, seed), PathBuf::from("."))),
        (None, None) => Err(AppError::config("give --manifest or --preset")),
    }
}

fn run(cli: Cli) -> AppResult<u8> {
    match cli.command {
        Command::Fit(args) => {
            let config = run_config(args.settings, Some(vec![args.method]), 0)?;
            let record = commands::fit_site(&args.site, args.method, &config)?;
            let mut json = serde_json::to_string(&record).map_err(|e| AppError::Fit(e.to_string()))?;
            json.push('\n');
            match &args.out {
                Some(path) => std::fs::write(path, json).map_err(|e| AppError::io(path, e))?,
                None => print!("{json}"),
            }
            if let Some(e) = &record.error {
                eprintln!("warning: {e}");
            }
            Ok(if record.converged { exit::OK } else { exit::FIT_FAILED })
        }
        Command::Simulate(args) => {
            let (manifest, base) = corpus(&args.corpus, args.seed)?;
            let written = commands::simulate(&manifest, &base, &args.out)?;
            eprintln!("wrote {} files to {}", written.len(), args.out.display());
            Ok(exit::OK)
        }
        Command::Benchmark(args) => {
            let config = run_config(args.settings, args.methods, args.min_wet)?;
            let (manifest, base) = corpus(&args.corpus, config.seed)?;
            let jobs = match args.jobs {
                Some(0) => return Err(AppError::config("--jobs must be at least 1")),
                Some(j) => j,
                None => std::thread::available_parallelism().map_or(1, usize::from),
            };
            let outcome = commands::benchmark(&manifest, &base, &config, jobs, &args.out, args.svg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} sites ({} excluded), {} fits, {} converged",
                outcome.sites_used, outcome.sites_excluded, outcome.fits, outcome.converged
            );
            Ok(if outcome.converged == 0 { exit::FIT_FAILED } else { exit::OK })
        }
        Command::Report(args) => {
            let options = ReportOptions {
                empirical: args.empirical,
                quantiles: quantile_set(args.quantiles)?,
                methods: args.methods,
                svg: args.svg,
            };
            for w in commands::report(&args.records, &args.out, &options)? {
                eprintln!("warning: {w}");
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
