//! Suite orchestration and the JSON/CSV report surface.

pub mod config;
pub mod scenarios;
mod suites;

pub use suites::limit_sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tolerances::{self, ToleranceEntry};
pub use config::{RunConfig, Suite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    /// Recorded for information, not checked.
    Report,
}

/// One reported scalar with the threshold it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(
        quantity: impl Into<String>,
        value: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        let pass = match relation {
            Relation::Le => value <= tolerance,
            Relation::Lt => value < tolerance,
            Relation::Ge => value >= tolerance,
            Relation::Gt => value > tolerance,
            Relation::Report => true,
        };
        Self {
            quantity: quantity.into(),
            value,
            relation,
            tolerance: Some(tolerance),
            pass,
        }
    }

    pub fn report(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            relation: Relation::Report,
            tolerance: None,
            pass: true,
        }
    }

    pub fn flag(quantity: impl Into<String>, ok: bool) -> Self {
        Self::new(quantity, if ok { 1.0 } else { 0.0 }, Relation::Ge, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Structured results: verdicts, witnesses, constants.
    pub details: serde_json::Value,
    /// Wall-clock time; excluded from the CSV export.
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub tolerances: Vec<ToleranceEntry>,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
    /// `suite/quantity` of every failed check.
    pub failures: Vec<String>,
}

/// Runs the requested suites concurrently and merges them in dependency order.
pub fn run(config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let params = config.params()?;
    let suites = config.ordered_suites();
    let results: Vec<Result<SuiteReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&suite| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let (checks, details) = suites::run_suite(suite, config, &params)?;
                    Ok(SuiteReport {
                        suite,
                        checks,
                        details,
                        seconds: start.elapsed().as_secs_f64(),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let suites = results.into_iter().collect::<Result<Vec<_>>>()?;
    let failures: Vec<String> = suites
        .iter()
        .flat_map(|s| {
            s.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("{}/{}", s.suite.name(), c.quantity))
        })
        .collect();
    Ok(VerificationReport {
        config: config.clone(),
        tolerances: tolerances::table(),
        passed: failures.is_empty(),
        failures,
        suites,
    })
}

fn number(v: f64) -> String {
    format!("{v:e}")
}

/// `suite, quantity, value, tolerance, pass` rows, one per reported scalar.
pub fn write_csv<W: Write>(report: &VerificationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = crate::galerkin::export::csv_error;
    w.write_record(["suite", "quantity", "value", "tolerance", "pass"])
        .map_err(err)?;
    for s in &report.suites {
        for c in &s.checks {
            let tol = match (c.relation, c.tolerance) {
                (Relation::Report, _) | (_, None) => String::new(),
                (rel, Some(t)) => {
                    let op = match rel {
                        Relation::Le => "<=",
                        Relation::Lt => "<",
                        Relation::Ge => ">=",
                        Relation::Gt => ">",
                        Relation::Report => unreachable!(),
                    };
                    format!("{op} {}", number(t))
                }
            };
            w.write_record([
                s.suite.name(),
                &c.quantity,
                &number(c.value),
                &tol,
                if c.pass { "true" } else { "false" },
            ])
            .map_err(err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &VerificationReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

/// Cell-centred sample points per direction in the field export.
pub const FIELD_SAMPLES: usize = 6;

/// Solves the lid-driven, heated-wall cavity for `config` and writes every
/// field component on a uniform grid.
pub fn write_cavity_fields<W: Write>(config: &RunConfig, out: W) -> Result<()> {
    config.validate()?;
    let params = config.params()?;
    let sp = crate::galerkin::DiscreteSpaces::new(
        config.degree,
        config.subdivisions,
        crate::galerkin::DiscreteSpaces::pressure_mode_for(params.epsilon_w),
        crate::galerkin::Pairing::Enriched,
    )?;
    let sys = crate::galerkin::assemble_system(
        &sp,
        &params,
        &crate::galerkin::VolumeSources::default(),
        &scenarios::lid_and_hot_wall(),
    )?;
    let sol = crate::saddle::solve_mixed(&sys)?;
    let axis: Vec<f64> = (0..FIELD_SAMPLES)
        .map(|i| (i as f64 + 0.5) / FIELD_SAMPLES as f64)
        .collect();
    let grid = crate::galerkin::basis::PointGrid {
        points: vec![axis; 3],
        weights: vec![vec![1.0; FIELD_SAMPLES]; 3],
    };
    crate::galerkin::export::write_fields_csv(&sp, &sol.u, &sol.p, &grid, out)
}

/// Paths of the report files under `dir`.
pub struct ReportFiles {
    pub json: PathBuf,
    pub csv: PathBuf,
}

pub fn export(report: &VerificationReport, dir: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        json: dir.join("report.json"),
        csv: dir.join("report.csv"),
    };
    let mut json = std::io::BufWriter::new(std::fs::File::create(&files.json)?);
    write_json(report, &mut json)?;
    json.flush()?;
    write_csv(
        report,
        std::io::BufWriter::new(std::fs::File::create(&files.csv)?),
    )?;
    Ok(files)
}
