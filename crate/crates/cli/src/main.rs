use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tagland_core::harness::suite::{case_study, full_nominal_suite};
use tagland_core::harness::{
    export_timeseries, load_scenario, read_csv, run_batch, run_scenario, write_plot, Format, Outcome, Scenario, SimConfig,
};

/// Simulated fiducial-marker precision landing.
#[derive(Parser, Debug)]
#[command(name = "tagland", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and export its telemetry.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the telemetry file.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Run every `*.toml` scenario in a directory and write summary statistics.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        /// Summary CSV path.
        #[arg(long)]
        summary: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a state/command timeline from a telemetry CSV (`.svg`, or text otherwise).
    Plot {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the nominal scenario suite and the obscuration case study as scenario files.
    Suite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

fn run(scenario: &Path, seed: Option<u64>, out: &Path, format: Format) -> Result<Outcome> {
    let mut s = load_scenario(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let cfg = SimConfig::resolve(&s)?;
    log::info!("scenario {} seed {}", s.name, s.seed);
    let record = run_scenario(&s, &cfg)?;
    let path = out.join(format!("{}.{}", s.name, format.extension()));
    export_timeseries(&record, &path, format)?;
    let last = record.rows.last().map_or(0.0, |r| r.t);
    match record.touchdown_error_m {
        Some(e) => println!("{}: landed at t={:.2} s, touchdown error {:.3} m -> {}", s.name, last, e, path.display()),
        None => println!("{}: timeout after {:.2} s -> {}", s.name, last, path.display()),
    }
    Ok(record.outcome)
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "toml"));
    files.sort();
    if files.is_empty() {
        bail!("no *.toml scenarios in {}", dir.display());
    }
    Ok(files)
}

fn batch(dir: &Path, summary: &Path, jobs: Option<usize>) -> Result<()> {
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let mut work: Vec<(Scenario, SimConfig)> = Vec::new();
    for path in scenario_files(dir)? {
        let s = load_scenario(&path)?;
        let cfg = SimConfig::resolve(&s)?;
        work.push((s, cfg));
    }
    log::info!("running {} scenarios from {}", work.len(), dir.display());
    let result = run_batch(&work, jobs)?;
    if let Some(parent) = summary.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(summary, result.summary.to_csv()?).with_context(|| format!("writing {}", summary.display()))?;
    for row in &result.summary.rows {
        println!(
            "{:<11} landed {:>3}/{:<3} mean {:.3} m  std {:.3} m  max start {:.0} m / {:.0} m",
            row.group, row.n, row.runs, row.mu_e_m, row.sigma_e_m, row.max_dist_m, row.max_alt_m
        );
    }
    Ok(())
}

fn write_suite(out: &Path, seed: u64) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut all = full_nominal_suite(seed);
    all.push(case_study());
    for s in &all {
        let path = out.join(format!("{}.toml", s.name));
        fs::write(&path, s.to_toml()).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {} scenarios to {}", all.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, out, format } => run(&scenario, seed, &out, format.into()).map(Some),
        Command::Batch { dir, summary, jobs } => batch(&dir, &summary, jobs).map(|_| None),
        Command::Plot { record, out } => read_csv(&record)
            .and_then(|rows| write_plot(&rows, &out))
            .map(|_| None)
            .map_err(Into::into),
        Command::Suite { out, seed } => write_suite(&out, seed).map(|_| None),
    };
    match result {
        Ok(Some(Outcome::Timeout)) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
