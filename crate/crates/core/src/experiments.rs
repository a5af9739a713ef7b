//! Truncation-ladder experiments: decay of truncated solutions in the
//! uniqueness regimes against stabilization to a bounded `γ`-family in the
//! sharpness regime.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{check_hypothesis, Hypothesis, HypothesisGrid, HypothesisReport, PotentialC, RadialDrift};
use crate::geometry::{classify_volume_growth, growth_radii, GrowthClass, GrowthReport, ModelManifold, WarpingFunction};
use crate::solver::{
    solve_bvp_with, verify_supersolution, BVPProblem, RadialGrid, SolutionGrid, SolveOptions, Spacing, Supersolution,
    SupersolutionReport,
};
use crate::weights::{admissible_params, weighted_lp_norm, AdmissibleParams, RadialField, Theorem, Weight, WeightedNorm};

/// Relative change between the last two probes below which the ladder is
/// considered converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Ratio of last to first probe below which the ladder is considered decaying.
pub const DECAY_RATIO: f64 = 0.01;
/// Largest admissible residual of a reported family member.
pub const FAMILY_RESIDUAL_TOL: f64 = 1e-4;
/// Two family members closer than this in sup-norm count as the same.
pub const DISTINCT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Uniqueness,
    Multiplicity,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub nodes: usize,
    pub spacing: Spacing,
    pub upwind: bool,
    /// Truncation radius for single solves and families.
    pub r_max: f64,
}

impl SolverSettings {
    pub fn grid(&self, r_max: f64) -> Result<RadialGrid> {
        match self.spacing {
            Spacing::Uniform | Spacing::Custom => RadialGrid::uniform(r_max, self.nodes),
            Spacing::Graded => RadialGrid::graded(r_max, self.nodes),
        }
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions { upwind: self.upwind }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub manifold: ModelManifold,
    pub drift: RadialDrift,
    pub potential: PotentialC,
    pub weight: Weight,
    pub p: f64,
    pub r_star: f64,
    pub ladder: Vec<f64>,
    pub gammas: Vec<f64>,
    pub regime: Regime,
    pub solver: SolverSettings,
}

impl Scenario {
    /// Checks the structural invariants of a scenario.
    pub fn validate(&self) -> Result<()> {
        let ladder = &self.ladder;
        if ladder.len() < 4 {
            return Err(Error::input(format!("truncation ladder needs at least 4 radii, got {}", ladder.len())));
        }
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("truncation ladder must be strictly increasing"));
        }
        let (lo, hi) = (ladder[0], ladder[ladder.len() - 1]);
        if hi / lo < 8.0 {
            return Err(Error::input(format!("truncation ladder must span a factor >= 8, got {}", hi / lo)));
        }
        if !(self.r_star > 0.0 && self.r_star < lo) {
            return Err(Error::input(format!(
                "probe radius must lie in (0, {lo}), got {}",
                self.r_star
            )));
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidExponent(self.p));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::input("boundary values must be finite"));
        }
        if !(self.solver.r_max > self.r_star) {
            return Err(Error::input("solver radius must exceed the probe radius"));
        }
        Ok(())
    }

    pub fn problem(&self, gamma: f64, r_max: f64) -> Result<BVPProblem> {
        BVPProblem::new(
            self.manifold.clone(),
            self.drift.clone(),
            self.potential.clone(),
            gamma,
            r_max,
        )
    }

    pub fn solve(&self, gamma: f64, r_max: f64) -> Result<SolutionGrid> {
        let grid = self.solver.grid(r_max)?;
        solve_bvp_with(&self.problem(gamma, r_max)?, &grid, self.solver.options())
    }
}

/// Hypotheses, volume growth and admissibility, and the regime they predict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assessment {
    pub hypotheses: Vec<HypothesisReport>,
    pub growth: Option<GrowthReport>,
    pub growth_error: Option<String>,
    pub admissibility: Option<AdmissibleParams>,
    pub predicted: Regime,
    pub notes: Vec<String>,
}

impl Assessment {
    pub fn report(&self, label: &str) -> Option<&HypothesisReport> {
        self.hypotheses.iter().find(|h| h.hypothesis.label() == label)
    }

    fn passed(&self, label: &str) -> bool {
        self.report(label).is_some_and(|h| h.pass)
    }

    pub fn sharpness(&self) -> Option<&HypothesisReport> {
        self.report("S22")
    }
}

fn volume_growth(manifold: &ModelManifold) -> Result<GrowthReport> {
    classify_volume_growth(manifold, &growth_radii(1e4, 32))
        .or_else(|_| classify_volume_growth(manifold, &growth_radii(100.0, 24)))
}

/// Growth exponent `α` entering the admissibility condition of `theorem`,
/// or `None` when the volume grows too fast for that weight family.
fn growth_alpha(theorem: Theorem, class: &GrowthClass) -> Option<f64> {
    match (theorem, *class) {
        (_, GrowthClass::SuperExponential) => None,
        (Theorem::T22, GrowthClass::Exponential { alpha }) => Some(alpha),
        (Theorem::T22, _) => Some(0.0),
        (Theorem::T23 { .. }, GrowthClass::Polynomial { .. }) => Some(0.0),
        (Theorem::T23 { theta }, GrowthClass::StretchedExponential { alpha, theta: t }) if t <= theta => Some(alpha),
        (Theorem::T23 { .. }, _) => None,
        (Theorem::T24, GrowthClass::Polynomial { alpha }) => Some(alpha),
        (Theorem::T24, _) => None,
    }
}

/// Runs the hypothesis checks on the default grid and derives the regime
/// predicted for the scenario.
pub fn assess(scenario: &Scenario) -> Result<Assessment> {
    let grid = HypothesisGrid::default();
    let theorem = scenario.weight.theorem();
    let mut variants = vec![Hypothesis::H0, Hypothesis::H2, Hypothesis::H3, Hypothesis::S22];
    if let Theorem::T23 { theta } = theorem {
        variants.insert(1, Hypothesis::H1 { theta });
    }
    let hypotheses = variants
        .into_iter()
        .map(|h| check_hypothesis(&scenario.manifold, &scenario.drift, &scenario.potential, h, &grid))
        .collect::<Result<Vec<_>>>()?;
    let mut assessment = Assessment {
        hypotheses,
        growth: None,
        growth_error: None,
        admissibility: None,
        predicted: Regime::Unknown,
        notes: Vec::new(),
    };

    match volume_growth(&scenario.manifold) {
        Ok(g) => assessment.growth = Some(g),
        Err(e) => assessment.growth_error = Some(e.to_string()),
    }

    let required: &[&str] = match theorem {
        Theorem::T22 => &["H0", "H3"],
        Theorem::T23 { .. } => &["H1", "H3"],
        Theorem::T24 => &["H2", "H3"],
    };
    let k = assessment
        .hypotheses
        .iter()
        .filter(|h| {
            let label = h.hypothesis.label();
            required.iter().any(|r| label.starts_with(r)) && label != "H3"
        })
        .filter_map(|h| h.constants.k_certified)
        .fold(0.0, f64::max);
    let c0 = assessment.report("H3").and_then(|h| h.constants.c0);
    let alpha = assessment.growth.as_ref().and_then(|g| growth_alpha(theorem, &g.class));

    match (alpha, c0) {
        (Some(alpha), Some(c0)) if c0 > 0.0 => {
            assessment.admissibility = Some(admissible_params(
                theorem,
                alpha,
                k,
                scenario.manifold.dim(),
                scenario.p.max(1.0 + 1e-12),
                c0,
                scenario.weight.parameter(),
            )?);
        }
        (None, _) => assessment
            .notes
            .push(format!("volume growth is outside the class covered by {}", theorem.label())),
        _ => assessment.notes.push("potential has no positive floor".into()),
    }

    let hypotheses_hold = required.iter().all(|r| {
        assessment
            .hypotheses
            .iter()
            .any(|h| h.hypothesis.label().starts_with(r) && h.pass)
    });
    let admissible = assessment.admissibility.as_ref().is_some_and(|a| a.feasible);
    assessment.predicted = if assessment.passed("S22") {
        Regime::Multiplicity
    } else if hypotheses_hold && admissible {
        Regime::Uniqueness
    } else {
        Regime::Unknown
    };
    Ok(assessment)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Decay,
    Convergence { limit: f64 },
    Inconclusive,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Decay => "decay",
            Classification::Convergence { .. } => "convergence",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub r_max: f64,
    pub u_at_rstar: Option<f64>,
    pub residual: Option<f64>,
    pub sup_norm: Option<f64>,
    pub norm: Option<WeightedNorm>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub scenario: String,
    pub gamma: f64,
    pub r_star: f64,
    pub probes: Vec<ProbeRow>,
    pub classification: Classification,
    /// Aitken extrapolation of the last three probes.
    pub limit_estimate: Option<f64>,
    pub assessment: Assessment,
    pub declared_regime: Regime,
    /// Whether the classification matches the predicted regime (decay for
    /// uniqueness, convergence for multiplicity; anything for unknown).
    pub consistent: bool,
    /// `|u_{R_{i+1}}(r*) - u_{R_i}(r*)| · R_i^{σ-1}` for consecutive rungs,
    /// when the sharpness exponent `σ` is known.
    pub barrier_constants: Vec<f64>,
}

/// Classifies a ladder of probe values.
pub fn classify(probes: &[f64]) -> Classification {
    if probes.is_empty() || probes.iter().any(|v| !v.is_finite()) {
        return Classification::Inconclusive;
    }
    if probes.iter().all(|&v| v == 0.0) {
        return Classification::Decay;
    }
    let first = probes[0];
    let last = probes[probes.len() - 1];
    if last.abs() < DECAY_RATIO * first.abs() {
        return Classification::Decay;
    }
    if probes.len() >= 2 {
        let prev = probes[probes.len() - 2];
        if last != 0.0 && (last - prev).abs() <= CONVERGENCE_TOL * last.abs() {
            return Classification::Convergence {
                limit: aitken(probes).unwrap_or(last),
            };
        }
    }
    Classification::Inconclusive
}

/// `Δ²` extrapolation of the last three values.
pub fn aitken(values: &[f64]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    let n = values.len();
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = (c - b) - (b - a);
    if denom == 0.0 {
        return None;
    }
    let l = c - (c - b) * (c - b) / denom;
    l.is_finite().then_some(l)
}

fn probe(scenario: &Scenario, gamma: f64, r_max: f64) -> ProbeRow {
    let run = || -> Result<(f64, f64, f64, Option<WeightedNorm>)> {
        let u = scenario.solve(gamma, r_max)?;
        let norm = weighted_lp_norm(
            &scenario.manifold,
            &RadialField::Grid(&u),
            &scenario.weight,
            scenario.p,
            f64::INFINITY,
        )
        .ok();
        Ok((u.value_at(scenario.r_star)?, u.residual(), u.sup_norm(), norm))
    };
    match run() {
        Ok((value, residual, sup, norm)) => ProbeRow {
            r_max,
            u_at_rstar: Some(value),
            residual: Some(residual),
            sup_norm: Some(sup),
            norm,
            error: None,
        },
        Err(e) => ProbeRow {
            r_max,
            u_at_rstar: None,
            residual: None,
            sup_norm: None,
            norm: None,
            error: Some(e.to_string()),
        },
    }
}

/// Solves the truncated problem with `u(R) = 1` on every rung of the ladder.
pub fn dichotomy_scan(scenario: &Scenario) -> Result<DichotomyReport> {
    dichotomy_scan_with_gamma(scenario, 1.0)
}

pub fn dichotomy_scan_with_gamma(scenario: &Scenario, gamma: f64) -> Result<DichotomyReport> {
    scenario.validate()?;
    let assessment = assess(scenario)?;
    let probes: Vec<ProbeRow> = scenario
        .ladder
        .par_iter()
        .map(|&r| probe(scenario, gamma, r))
        .collect();
    let values: Option<Vec<f64>> = probes.iter().map(|p| p.u_at_rstar).collect();
    let classification = values.as_deref().map_or(Classification::Inconclusive, classify);
    let limit_estimate = values.as_deref().and_then(aitken);
    let consistent = match assessment.predicted {
        Regime::Uniqueness => classification == Classification::Decay,
        Regime::Multiplicity => matches!(classification, Classification::Convergence { .. }),
        Regime::Unknown => true,
    };
    let barrier_constants = match (assessment.sharpness().and_then(|s| s.constants.sigma), &values) {
        (Some(sigma), Some(v)) => scenario
            .ladder
            .windows(2)
            .zip(v.windows(2))
            .map(|(r, u)| (u[1] - u[0]).abs() * r[0].powf(sigma - 1.0))
            .collect(),
        _ => Vec::new(),
    };
    Ok(DichotomyReport {
        scenario: scenario.name.clone(),
        gamma,
        r_star: scenario.r_star,
        probes,
        classification,
        limit_estimate,
        assessment,
        declared_regime: scenario.regime,
        consistent,
        barrier_constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub gamma: f64,
    pub boundary_value: f64,
    pub residual: f64,
    pub sup_norm: f64,
    pub norm: Option<WeightedNorm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub sup_distance: f64,
    pub gamma_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub scenario: String,
    pub r_max: f64,
    pub members: Vec<FamilyMember>,
    pub distances: Vec<PairDistance>,
    pub sharpness: HypothesisReport,
    pub warnings: Vec<String>,
    pub residuals_ok: bool,
    pub separation_ok: bool,
    pub bounded_ok: bool,
    /// Number of members pairwise farther apart than [`DISTINCT_TOL`].
    pub distinct: usize,
    #[serde(skip)]
    pub solutions: Vec<SolutionGrid>,
}

impl FamilyReport {
    pub fn pass(&self) -> bool {
        self.residuals_ok && self.separation_ok && self.bounded_ok && self.warnings.is_empty()
    }
}

/// One bounded solution per boundary value of the scenario at truncation
/// radius `r_max`.
pub fn gamma_family(scenario: &Scenario, r_max: f64) -> Result<FamilyReport> {
    scenario.validate()?;
    let sharpness = check_hypothesis(
        &scenario.manifold,
        &scenario.drift,
        &scenario.potential,
        Hypothesis::S22,
        &HypothesisGrid::default(),
    )?;
    let mut warnings = Vec::new();
    if !sharpness.pass {
        warnings.push("regime mismatch: the sharpness condition S22 does not hold".to_string());
    }
    let mut distinct_gammas = scenario.gammas.clone();
    distinct_gammas.sort_by(f64::total_cmp);
    distinct_gammas.dedup();
    if distinct_gammas.len() < 2 {
        warnings.push("regime mismatch: fewer than two distinct boundary values cannot exhibit multiplicity".to_string());
    }

    let solutions = scenario
        .gammas
        .par_iter()
        .map(|&g| scenario.solve(g, r_max))
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<FamilyMember> = solutions
        .iter()
        .zip(&scenario.gammas)
        .map(|(u, &gamma)| FamilyMember {
            gamma,
            boundary_value: *u.values().last().unwrap(),
            residual: u.residual(),
            sup_norm: u.sup_norm(),
            norm: weighted_lp_norm(
                &scenario.manifold,
                &RadialField::Grid(u),
                &scenario.weight,
                scenario.p,
                f64::INFINITY,
            )
            .ok(),
        })
        .collect();

    let mut distances = Vec::new();
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            distances.push(PairDistance {
                gamma_a: scenario.gammas[i],
                gamma_b: scenario.gammas[j],
                sup_distance: solutions[i].sup_distance(&solutions[j])?,
                gamma_gap: (scenario.gammas[i] - scenario.gammas[j]).abs(),
            });
        }
    }
    let max_gamma = scenario.gammas.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let residuals_ok = members.iter().all(|m| m.residual <= FAMILY_RESIDUAL_TOL);
    let separation_ok = distances
        .iter()
        .all(|d| d.sup_distance >= d.gamma_gap * (1.0 - 1e-12));
    let bounded_ok = members.iter().all(|m| m.sup_norm <= max_gamma * (1.0 + 1e-12));

    // greedy count of members pairwise separated by more than DISTINCT_TOL
    let mut representatives: Vec<usize> = Vec::new();
    for i in 0..solutions.len() {
        let separated = representatives
            .iter()
            .all(|&j| solutions[i].sup_distance(&solutions[j]).is_ok_and(|d| d > DISTINCT_TOL));
        if separated {
            representatives.push(i);
        }
    }

    Ok(FamilyReport {
        scenario: scenario.name.clone(),
        r_max,
        members,
        distances,
        sharpness,
        warnings,
        residuals_ok,
        separation_ok,
        bounded_ok,
        distinct: representatives.len(),
        solutions,
    })
}

/// Barrier candidate `h = C r^{-β}`; `beta = None` picks `(σ - 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub c: f64,
    pub beta: Option<f64>,
}

impl Default for BarrierSpec {
    fn default() -> Self {
        Self { c: 1.0, beta: None }
    }
}

#[derive(Debug, Clone)]
pub struct CorollarySetup {
    pub part_i: Scenario,
    pub part_ii: Scenario,
    pub barrier: BarrierSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartOneReport {
    pub scan: DichotomyReport,
    /// `(N-1)λ + 1` when the warping is Euclidean or power-law.
    pub expected_alpha: Option<f64>,
    pub fitted_alpha: Option<f64>,
    pub admissibility: Option<AdmissibleParams>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartTwoReport {
    pub family: FamilyReport,
    pub barrier: Option<SupersolutionReport>,
    pub constant: Option<SupersolutionReport>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub part_i: PartOneReport,
    pub part_ii: PartTwoReport,
    pub pass: bool,
}

fn expected_alpha(manifold: &ModelManifold) -> Option<f64> {
    let n1 = manifold.dim() as f64 - 1.0;
    match manifold.warping() {
        WarpingFunction::Euclidean => Some(n1 + 1.0),
        WarpingFunction::PowerLaw { lambda } => Some(n1 * lambda + 1.0),
        _ => None,
    }
}

/// Part (i): decay with an admissible polynomial weight. Part (ii): a
/// bounded family with at least three distinct members, certified by the
/// barrier `C r^{-β}` and the constant `1/c₀`.
pub fn reproduce_corollary_2_6(setup: &CorollarySetup) -> Result<CorollaryReport> {
    let scan = dichotomy_scan(&setup.part_i)?;
    let mut failures = Vec::new();
    if scan.classification != Classification::Decay {
        failures.push(format!("part (i) decay: classification is {}", scan.classification.label()));
    }
    let admissibility = scan.assessment.admissibility.clone();
    if !admissibility.as_ref().is_some_and(|a| a.feasible) {
        failures.push("part (i) admissibility: weight parameters are not feasible".into());
    }
    if !scan.assessment.passed("H2") {
        failures.push("part (i) hypothesis H2 fails".into());
    }
    let expected = expected_alpha(&setup.part_i.manifold);
    let fitted = match scan.assessment.growth.as_ref().map(|g| g.class) {
        Some(GrowthClass::Polynomial { alpha }) => Some(alpha),
        _ => None,
    };
    match (expected, fitted) {
        (Some(e), Some(f)) if (f - e).abs() > 0.05 * e => {
            failures.push(format!("part (i) volume growth exponent {f} differs from {e} by more than 5%"))
        }
        (Some(_), None) => failures.push("part (i) volume growth is not polynomial".into()),
        _ => {}
    }
    let part_i = PartOneReport {
        scan,
        expected_alpha: expected,
        fitted_alpha: fitted,
        admissibility,
        failures,
    };

    let s2 = &setup.part_ii;
    let family = gamma_family(s2, s2.solver.r_max)?;
    let mut failures = Vec::new();
    failures.extend(family.warnings.iter().map(|w| format!("part (ii) {w}")));
    if family.distinct < 3 {
        failures.push(format!(
            "part (ii) multiplicity: only {} numerically distinct solutions",
            family.distinct
        ));
    }
    if !family.residuals_ok {
        failures.push(format!("part (ii) residuals exceed {FAMILY_RESIDUAL_TOL:e}"));
    }
    if !family.bounded_ok {
        failures.push("part (ii) boundedness: a member exceeds max |gamma|".into());
    }
    if !family.separation_ok {
        failures.push("part (ii) separation: a pairwise distance is below the boundary gap".into());
    }
    let (barrier, constant) = if family.sharpness.pass {
        let sigma = family.sharpness.constants.sigma.unwrap_or(1.0);
        let r0 = family.sharpness.constants.r0.unwrap_or(2.0).max(2.0);
        let beta = setup.barrier.beta.unwrap_or((sigma - 1.0) / 2.0);
        if beta >= sigma - 1.0 {
            failures.push(format!("part (ii) barrier exponent {beta} violates beta < sigma - 1 = {}", sigma - 1.0));
        }
        let r_end = s2.solver.r_max.max(2.0 * r0);
        let barrier = verify_supersolution(
            &s2.manifold,
            &s2.drift,
            &s2.potential,
            &Supersolution::InversePower { c: setup.barrier.c, beta },
            r0,
            r_end,
            -1.0,
        )?;
        let constant = verify_supersolution(
            &s2.manifold,
            &s2.drift,
            &s2.potential,
            &Supersolution::Constant(1.0 / s2.potential.floor()),
            r0,
            r_end,
            -1.0,
        )?;
        if !barrier.pass {
            failures.push(format!("part (ii) barrier C r^-beta fails (margin {})", barrier.margin));
        }
        if !constant.pass {
            failures.push(format!("part (ii) constant supersolution 1/c0 fails (margin {})", constant.margin));
        }
        (Some(barrier), Some(constant))
    } else {
        (None, None)
    };
    let part_ii = PartTwoReport {
        family,
        barrier,
        constant,
        failures,
    };
    let pass = part_i.failures.is_empty() && part_ii.failures.is_empty();
    Ok(CorollaryReport { part_i, part_ii, pass })
}
