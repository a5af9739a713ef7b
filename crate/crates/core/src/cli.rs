//! Config-driven runs behind the `driftlab` binary.

use std::fs;
use std::path::PathBuf;
use std::time::{Instant, SystemTime};

use crate::config::{self, ReproduceConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    assess, dichotomy_scan, gamma_family, reproduce_corollary_2_6, Classification, FamilyReport, Regime, Scenario,
};
use crate::plot::{self, PlotKind};
use crate::presets;
use crate::report::{self, Metadata, OutputDir, Payload, RunReport, SolveSummary};
use crate::solver::{shoot_oracle, solve_bvp_with};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Largest sup-norm distance between the finite-difference solution and the
/// shooting oracle accepted by `solve`.
pub const ORACLE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Solve,
    Dichotomy,
    Family,
    Reproduce,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Dichotomy => "dichotomy",
            Command::Family => "family",
            Command::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Path(PathBuf),
    Preset(String),
}

impl Source {
    fn describe(&self) -> String {
        match self {
            Source::Path(p) => p.display().to_string(),
            Source::Preset(n) => format!("preset:{n}"),
        }
    }

    fn read(&self) -> Result<String> {
        match self {
            Source::Path(p) => fs::read_to_string(p).map_err(|e| Error::io(p, e)),
            Source::Preset(n) => presets::text(n).map(str::to_string).ok_or_else(|| Error::Config {
                key: "preset".into(),
                line: None,
                column: None,
                message: format!(
                    "unknown preset `{n}`; available: {}",
                    presets::names().collect::<Vec<_>>().join(", ")
                ),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub source: Source,
    pub command: Command,
    pub out: PathBuf,
    /// Overrides `solver.nodes` everywhere.
    pub nodes: Option<usize>,
    /// Treat an inconclusive classification as a failure.
    pub strict: bool,
}

/// Exit status for an error that aborted a run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_PARSE,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_INVARIANT,
    }
}

pub fn report_exit_code(report: &RunReport) -> i32 {
    if report.pass {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    }
}

struct Artifacts {
    files: Vec<(String, String)>,
    failures: Vec<String>,
}

impl Artifacts {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn plot(&mut self, kind: PlotKind, series: &[plot::Series]) {
        match plot::render(kind, series) {
            Ok(svg) => self.file(&kind.file_name(), svg),
            Err(e) => self.failures.push(format!("plot {}: {e}", kind.name())),
        }
    }
}

/// Executes one command and writes its artifacts into `options.out`.
pub fn run(options: &RunOptions) -> Result<RunReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let text = options.source.read()?;
    let fallback = match &options.source {
        Source::Path(p) => p.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned()),
        Source::Preset(n) => n.clone(),
    };

    let mut art = Artifacts::new();
    let report = if options.command == Command::Reproduce {
        let mut cfg: ReproduceConfig = config::parse(&text)?;
        if let Some(n) = options.nodes {
            cfg.part_i.solver.nodes = n;
            cfg.part_ii.solver.nodes = n;
        }
        let setup = cfg.to_setup().map_err(|e| relocate(&text, e))?;
        let hash = config::config_hash(&cfg);
        let name = cfg.name.clone().unwrap_or(fallback);
        let result = reproduce_corollary_2_6(&setup)?;
        art.failures.extend(result.part_i.failures.iter().cloned());
        art.failures.extend(result.part_ii.failures.iter().cloned());
        art.file(report::PROBES_FILE, report::probes_csv(&result.part_i.scan));
        art.file(report::FAMILY_FILE, report::family_csv(&result.part_ii.family)?);
        art.plot(PlotKind::ProbeVsR, &[plot::probe_series(&result.part_i.scan)]);
        art.plot(PlotKind::FamilyOverlay, &plot::family_series(&result.part_ii.family));
        let failures = std::mem::take(&mut art.failures);
        RunReport::new(hash, name, failures, Payload::Reproduce(result))
    } else {
        let mut cfg: ScenarioConfig = config::parse(&text)?;
        if let Some(n) = options.nodes {
            cfg.solver.nodes = n;
        }
        let scenario = cfg.to_scenario(&fallback).map_err(|e| relocate(&text, e))?;
        let hash = config::config_hash(&cfg);
        let payload = run_scenario(options, &scenario, &mut art)?;
        let failures = std::mem::take(&mut art.failures);
        RunReport::new(hash, scenario.name.clone(), failures, payload)
    };

    let mut out = OutputDir::create(&options.out)?;
    out.write(report::REPORT_FILE, &report.to_json())?;
    for (name, contents) in &art.files {
        out.write(name, contents)?;
    }
    let meta = Metadata::new(
        options.command.name(),
        &options.source.describe(),
        started,
        clock.elapsed(),
    );
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    meta_json.push('\n');
    out.write(report::METADATA_FILE, &meta_json)?;
    Ok(report)
}

fn relocate(text: &str, e: Error) -> Error {
    match e {
        Error::Config {
            key,
            line: None,
            column,
            message,
        } => Error::Config {
            line: config::locate(text, &key),
            key,
            column,
            message,
        },
        other => other,
    }
}

fn run_scenario(options: &RunOptions, scenario: &Scenario, art: &mut Artifacts) -> Result<Payload> {
    match options.command {
        Command::Check => {
            let assessment = assess(scenario)?;
            if scenario.regime != Regime::Unknown && assessment.predicted != scenario.regime {
                art.failures.push(format!(
                    "declared regime: {:?} declared but the hypotheses predict {:?}",
                    scenario.regime, assessment.predicted
                ));
            }
            Ok(Payload::Check { assessment })
        }
        Command::Solve => {
            let gamma = 1.0;
            let r_max = scenario.solver.r_max;
            let problem = scenario.problem(gamma, r_max)?;
            let grid = scenario.solver.grid(r_max)?;
            let u = solve_bvp_with(&problem, &grid, scenario.solver.options())?;
            let (oracle_distance, oracle_error) = match shoot_oracle(&problem, &grid).and_then(|s| u.sup_distance(&s)) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            };
            match (oracle_distance, &oracle_error) {
                (Some(d), _) if d > ORACLE_TOL => art
                    .failures
                    .push(format!("oracle agreement: sup distance {d:e} exceeds {ORACLE_TOL:e}")),
                (None, Some(e)) => art.failures.push(format!("oracle agreement: shooting failed: {e}")),
                _ => {}
            }
            if scenario.potential.floor() > 0.0 && u.values().iter().any(|&v| !(-1e-12..=gamma + 1e-12).contains(&v)) {
                art.failures.push("maximum principle: 0 <= u <= gamma violated".into());
            }
            art.file(report::SOLUTION_FILE, report::solution_csv(&u));
            art.plot(PlotKind::SolutionProfile, &[plot::solution_series(&u, "u")]);
            Ok(Payload::Solve(SolveSummary {
                scenario: scenario.name.clone(),
                gamma,
                r_max,
                nodes: grid.len(),
                grid: grid.describe(),
                method: u.method(),
                problem_hash: u.problem_hash().to_string(),
                residual: u.residual(),
                sup_norm: u.sup_norm(),
                r_star: scenario.r_star,
                u_at_rstar: u.value_at(scenario.r_star)?,
                oracle_distance,
                oracle_error,
                assessment: assess(scenario)?,
            }))
        }
        Command::Dichotomy => {
            let report = dichotomy_scan(scenario)?;
            for p in &report.probes {
                if let Some(e) = &p.error {
                    art.failures.push(format!("solver failure at R = {}: {e}", p.r_max));
                }
            }
            let label = report.classification.label();
            if !report.consistent {
                art.failures.push(format!(
                    "regime consistency: classification {label} but the hypotheses predict {:?}",
                    report.assessment.predicted
                ));
            }
            let expected = match scenario.regime {
                Regime::Uniqueness => Some(Classification::Decay.label()),
                Regime::Multiplicity => Some("convergence"),
                Regime::Unknown => None,
            };
            if let Some(expected) = expected.filter(|e| *e != label) {
                art.failures.push(format!(
                    "declared regime: {:?} expects {expected}, got {label}",
                    scenario.regime
                ));
            }
            if options.strict && report.classification == Classification::Inconclusive {
                art.failures.push("strict: classification is inconclusive".into());
            }
            art.file(report::PROBES_FILE, report::probes_csv(&report));
            art.plot(PlotKind::ProbeVsR, &[plot::probe_series(&report)]);
            Ok(Payload::Dichotomy(report))
        }
        Command::Family => {
            let family = gamma_family(scenario, scenario.solver.r_max)?;
            art.failures.extend(family_failures(&family));
            art.file(report::FAMILY_FILE, report::family_csv(&family)?);
            art.plot(PlotKind::FamilyOverlay, &plot::family_series(&family));
            Ok(Payload::Family(family))
        }
        Command::Reproduce => Err(Error::Config {
            key: "command".into(),
            line: None,
            column: None,
            message: "reproduce expects a reproduction document".into(),
        }),
    }
}

fn family_failures(family: &FamilyReport) -> Vec<String> {
    let mut out: Vec<String> = family.warnings.clone();
    if !family.residuals_ok {
        out.push(format!("family residuals exceed {:e}", crate::experiments::FAMILY_RESIDUAL_TOL));
    }
    if !family.separation_ok {
        out.push("family separation: a pairwise distance is below the boundary gap".into());
    }
    if !family.bounded_ok {
        out.push("family boundedness: a member exceeds max |gamma|".into());
    }
    out
}
