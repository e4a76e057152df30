use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use r13_core::report::{self, RunConfig, Suite, VerificationReport};
use r13_core::Error;

const DEFAULT_OUTPUT_DIR: &str = "r13-output";
const OUTPUT_ENV: &str = "R13_OUTPUT_DIR";

/// Verification suites for the linearized R13 boundary value problem.
#[derive(Parser)]
#[command(name = "r13-verify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol ellipticity dichotomy and prefactor table.
    VerifyEllipticity(Overrides),
    /// Korn constants, coercivity chains, right inverses and Brezzi constants.
    EstimateConstants(Overrides),
    /// Saddle-point solves, Stokes-limit sweep and boundary residuals; also
    /// writes the cavity fields to `fields.csv`.
    Solve(Overrides),
    /// Runs the suites listed in the configuration.
    Report(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    kn: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon_w: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config and the R13_OUTPUT_DIR environment variable.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Checks(Vec<String>),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Config { .. }) => Failure::Usage(format!("{e:#}")),
            _ => Failure::Runtime(e),
        }
    }
}

fn resolve(o: &Overrides, suites: Option<&[Suite]>) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::from_path(path).map_err(|e| match e {
            Error::Config { .. } => Failure::Usage(format!("{}: {e}", path.display())),
            other => Failure::Usage(format!("cannot read {}: {other}", path.display())),
        })?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.kn {
        cfg.kn = v;
    }
    if let Some(v) = o.epsilon_w {
        cfg.epsilon_w = v;
    }
    if let Some(v) = o.degree {
        cfg.degree = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(s) = suites {
        cfg.suites = s.to_vec();
    }
    let dir = o
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    cfg.output_dir = Some(dir.clone());
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((cfg, dir))
}

fn summarize(report: &VerificationReport) {
    for s in &report.suites {
        let failed = s.checks.iter().filter(|c| !c.pass).count();
        println!(
            "{:<12} {:>4} checks  {:>3} failed  {:8.2}s",
            s.suite.name(),
            s.checks.len(),
            failed,
            s.seconds
        );
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    let (overrides, suites): (Overrides, Option<&[Suite]>) = match command {
        Command::VerifyEllipticity(o) => (o, Some(&[Suite::Ellipticity])),
        Command::EstimateConstants(o) => (o, Some(&[Suite::Korn, Suite::Constants])),
        Command::Solve(o) => (o, Some(&[Suite::Solve, Suite::Limit, Suite::Bc])),
        Command::Report(o) => (o, None),
    };
    let fields = suites.is_some_and(|s| s.contains(&Suite::Solve));
    let (cfg, dir) = resolve(&overrides, suites)?;

    let report = report::run(&cfg).context("running suites")?;
    let files = report::export(&report, &dir)
        .with_context(|| format!("writing reports to {}", dir.display()))?;
    if fields {
        write_fields(&cfg, &dir.join("fields.csv"))?;
    }
    summarize(&report);
    println!("wrote {} and {}", files.json.display(), files.csv.display());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks(report.failures))
    }
}

fn write_fields(cfg: &RunConfig, path: &Path) -> Result<(), Failure> {
    let file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    report::write_cavity_fields(cfg, std::io::BufWriter::new(file)).context("writing fields")?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(names)) => {
            eprintln!("{} check(s) failed:", names.len());
            for n in names {
                eprintln!("  {n}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
