//! Machine-readable run artifacts: `report.json`, CSV tables and a separate
//! `metadata.json` holding everything that varies between identical runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{Assessment, CorollaryReport, DichotomyReport, FamilyReport};
use crate::solver::{Method, SolutionGrid};

pub const REPORT_FILE: &str = "report.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const PROBES_FILE: &str = "probes.csv";
pub const FAMILY_FILE: &str = "family.csv";
pub const SOLUTION_FILE: &str = "solution.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub scenario: String,
    pub gamma: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub grid: String,
    pub method: Method,
    pub problem_hash: String,
    pub residual: f64,
    pub sup_norm: f64,
    pub r_star: f64,
    pub u_at_rstar: f64,
    /// Sup-norm distance to the shooting oracle on the same grid.
    pub oracle_distance: Option<f64>,
    pub oracle_error: Option<String>,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Payload {
    Check { assessment: Assessment },
    Solve(SolveSummary),
    Dichotomy(DichotomyReport),
    Family(FamilyReport),
    Reproduce(CorollaryReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub scenario: String,
    pub pass: bool,
    /// Failed invariants, by name.
    pub failures: Vec<String>,
    pub result: Payload,
}

impl RunReport {
    pub fn new(config_hash: String, scenario: String, failures: Vec<String>, result: Payload) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_hash,
            scenario,
            pass: failures.is_empty(),
            failures,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub config_source: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub elapsed_ms: u128,
    pub threads: usize,
}

impl Metadata {
    pub fn new(command: &str, config_source: &str, started: SystemTime, elapsed: Duration) -> Self {
        let ms = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
        Self {
            command: command.to_string(),
            config_source: config_source.to_string(),
            started_unix_ms: ms(started),
            finished_unix_ms: ms(started + elapsed),
            elapsed_ms: elapsed.as_millis(),
            threads: rayon::current_num_threads(),
        }
    }
}

/// Shortest round-trip form; scientific notation for very small or large
/// magnitudes, and no negative zero.
pub fn number(v: f64) -> String {
    let v = v + 0.0;
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// `R,u_at_rstar`; failed rungs have an empty value.
pub fn probes_csv(report: &DichotomyReport) -> String {
    let mut s = String::from("R,u_at_rstar\n");
    for p in &report.probes {
        let v = p.u_at_rstar.map(number).unwrap_or_default();
        let _ = writeln!(s, "{},{}", number(p.r_max), v);
    }
    s
}

/// `r,u_gamma_<γ>...` on the shared grid of the family.
pub fn family_csv(report: &FamilyReport) -> Result<String> {
    let first = report
        .solutions
        .first()
        .ok_or_else(|| Error::NoData("family has no members".into()))?;
    let nodes = first.grid().nodes();
    if report.solutions.iter().any(|u| u.grid().nodes() != nodes) {
        return Err(Error::Inconsistent("family members live on different grids".into()));
    }
    let mut s = String::from("r");
    for m in &report.members {
        let _ = write!(s, ",u_gamma_{}", number(m.gamma));
    }
    s.push('\n');
    for (i, r) in nodes.iter().enumerate() {
        s.push_str(&number(*r));
        for u in &report.solutions {
            let _ = write!(s, ",{}", number(u.values()[i]));
        }
        s.push('\n');
    }
    Ok(s)
}

/// `r,u`
pub fn solution_csv(u: &SolutionGrid) -> String {
    let mut s = String::from("r,u\n");
    for (r, v) in u.grid().nodes().iter().zip(u.values()) {
        let _ = writeln!(s, "{},{}", number(*r), number(*v));
    }
    s
}

/// Writes files into `dir`, creating it if needed.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
