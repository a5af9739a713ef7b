//! Strict JSON scenario documents. Unknown keys are rejected and every
//! diagnostic names the offending key path.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{BarrierSpec, CorollarySetup, Regime, Scenario, SolverSettings};
use crate::fields::{PotentialC, RadialDrift};
use crate::geometry::{ModelManifold, WarpingFunction};
use crate::solver::{hex, Spacing};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpingKind {
    Euclidean,
    Hyperbolic,
    PowerLaw,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpingConfig {
    pub kind: WarpingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    /// `[r, φ(r)]` pairs starting at `[0, 0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftFamily {
    Zero,
    PowerAffine,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub family: DriftFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// `[r, b_r(r)]` pairs starting at `[0, 0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Constant,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// The constant value, or the declared floor of a polynomial.
    pub c0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    Exponential,
    StretchedExponential,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub family: WeightFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "R")]
    pub r_max: f64,
    pub nodes: usize,
    pub grading: Grading,
    pub upwind: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub r_star: f64,
    #[serde(rename = "R_ladder")]
    pub r_ladder: Vec<f64>,
    pub gammas: Vec<f64>,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub warping: WarpingConfig,
    pub drift: DriftConfig,
    pub potential: PotentialConfig,
    pub weight: WeightConfig,
    pub p: f64,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// Two scenarios for the uniqueness/multiplicity reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub part_i: ScenarioConfig,
    pub part_ii: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierConfig>,
}

/// Parses a JSON document, reporting the key path, line and column of the
/// first error.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        Error::Config {
            key,
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    })?;
    Ok(value)
}

/// Pretty JSON; [`parse`] maps it back to an equal value.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config types always serialize")
}

/// Hex SHA-256 of the canonical (compact) serialization.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_string(value).expect("config types always serialize");
    hex(&Sha256::digest(canonical.as_bytes()))
}

fn invalid(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        line: None,
        column: None,
        message: message.into(),
    }
}

fn require(value: Option<f64>, key: &str, context: &str) -> Result<f64> {
    value.ok_or_else(|| invalid(key, format!("required for {context}")))
}

fn forbid<T>(value: &Option<T>, key: &str, context: &str) -> Result<()> {
    match value {
        Some(_) => Err(invalid(key, format!("not used by {context}"))),
        None => Ok(()),
    }
}

fn at(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        e @ Error::Config { .. } => e,
        other => invalid(key, other.to_string()),
    }
}

fn pairs(samples: &[[f64; 2]]) -> Vec<(f64, f64)> {
    samples.iter().map(|s| (s[0], s[1])).collect()
}

impl WarpingConfig {
    pub fn build(&self) -> Result<WarpingFunction> {
        let ctx = "this warping kind";
        match self.kind {
            WarpingKind::Euclidean => {
                forbid(&self.lambda, "warping.lambda", ctx)?;
                forbid(&self.curvature, "warping.curvature", ctx)?;
                forbid(&self.samples, "warping.samples", ctx)?;
                Ok(WarpingFunction::Euclidean)
            }
            WarpingKind::Hyperbolic => {
                forbid(&self.lambda, "warping.lambda", ctx)?;
                forbid(&self.samples, "warping.samples", ctx)?;
                let k = require(self.curvature, "warping.curvature", "hyperbolic warping")?;
                WarpingFunction::hyperbolic(k).map_err(at("warping.curvature"))
            }
            WarpingKind::PowerLaw => {
                forbid(&self.curvature, "warping.curvature", ctx)?;
                forbid(&self.samples, "warping.samples", ctx)?;
                let l = require(self.lambda, "warping.lambda", "power-law warping")?;
                WarpingFunction::power_law(l).map_err(at("warping.lambda"))
            }
            WarpingKind::Sampled => {
                forbid(&self.lambda, "warping.lambda", ctx)?;
                forbid(&self.curvature, "warping.curvature", ctx)?;
                let s = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| invalid("warping.samples", "required for sampled warping"))?;
                WarpingFunction::sampled(&pairs(s)).map_err(at("warping.samples"))
            }
        }
    }
}

impl DriftConfig {
    pub fn build(&self) -> Result<RadialDrift> {
        let ctx = "this drift family";
        match self.family {
            DriftFamily::Zero => {
                forbid(&self.amplitude, "drift.amplitude", ctx)?;
                forbid(&self.exponent, "drift.exponent", ctx)?;
                forbid(&self.offset, "drift.offset", ctx)?;
                forbid(&self.samples, "drift.samples", ctx)?;
                Ok(RadialDrift::zero())
            }
            DriftFamily::PowerAffine => {
                forbid(&self.samples, "drift.samples", ctx)?;
                let a = require(self.amplitude, "drift.amplitude", "power-affine drift")?;
                let s = require(self.exponent, "drift.exponent", "power-affine drift")?;
                RadialDrift::power_affine(a, s, self.offset.unwrap_or(0.0)).map_err(at("drift"))
            }
            DriftFamily::Sampled => {
                forbid(&self.amplitude, "drift.amplitude", ctx)?;
                forbid(&self.exponent, "drift.exponent", ctx)?;
                forbid(&self.offset, "drift.offset", ctx)?;
                let s = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| invalid("drift.samples", "required for sampled drift"))?;
                RadialDrift::sampled(&pairs(s)).map_err(at("drift.samples"))
            }
        }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialC> {
        match self.kind {
            PotentialKind::Constant => {
                forbid(&self.coefficients, "potential.coefficients", "a constant potential")?;
                PotentialC::constant(self.c0).map_err(at("potential.c0"))
            }
            PotentialKind::Polynomial => {
                let coeffs = self
                    .coefficients
                    .clone()
                    .ok_or_else(|| invalid("potential.coefficients", "required for a polynomial potential"))?;
                PotentialC::polynomial(coeffs, self.c0).map_err(at("potential"))
            }
        }
    }
}

impl WeightConfig {
    pub fn build(&self) -> Result<Weight> {
        let ctx = "this weight family";
        match self.family {
            WeightFamily::Exponential => {
                forbid(&self.theta, "weight.theta", ctx)?;
                forbid(&self.tau, "weight.tau", ctx)?;
                Weight::exponential(require(self.beta, "weight.beta", "an exponential weight")?).map_err(at("weight.beta"))
            }
            WeightFamily::StretchedExponential => {
                forbid(&self.tau, "weight.tau", ctx)?;
                let beta = require(self.beta, "weight.beta", "a stretched exponential weight")?;
                let theta = require(self.theta, "weight.theta", "a stretched exponential weight")?;
                Weight::stretched_exponential(beta, theta).map_err(at("weight"))
            }
            WeightFamily::Polynomial => {
                forbid(&self.beta, "weight.beta", ctx)?;
                forbid(&self.theta, "weight.theta", ctx)?;
                Weight::polynomial(require(self.tau, "weight.tau", "a polynomial weight")?).map_err(at("weight.tau"))
            }
        }
    }
}

impl ScenarioConfig {
    /// Builds and validates the scenario. `fallback_name` is used when the
    /// document has no `name`.
    pub fn to_scenario(&self, fallback_name: &str) -> Result<Scenario> {
        let warping = self.warping.build()?;
        let manifold = ModelManifold::new(self.dimension, warping).map_err(at("dimension"))?;
        if self.solver.nodes == 0 {
            return Err(invalid("solver.nodes", "must be positive"));
        }
        let scenario = Scenario {
            name: self.name.clone().unwrap_or_else(|| fallback_name.to_string()),
            manifold,
            drift: self.drift.build()?,
            potential: self.potential.build()?,
            weight: self.weight.build()?,
            p: self.p,
            r_star: self.experiment.r_star,
            ladder: self.experiment.r_ladder.clone(),
            gammas: self.experiment.gammas.clone(),
            regime: self.experiment.regime,
            solver: SolverSettings {
                nodes: self.solver.nodes,
                spacing: match self.solver.grading {
                    Grading::Uniform => Spacing::Uniform,
                    Grading::Graded => Spacing::Graded,
                },
                upwind: self.solver.upwind,
                r_max: self.solver.r_max,
            },
        };
        scenario.validate().map_err(at("experiment"))?;
        scenario.solver.grid(scenario.solver.r_max).map_err(at("solver"))?;
        Ok(scenario)
    }
}

impl ReproduceConfig {
    pub fn to_setup(&self) -> Result<CorollarySetup> {
        let name = self.name.as_deref().unwrap_or("reproduce");
        let prefix = |key: &'static str| {
            move |e: Error| match e {
                Error::Config {
                    key: k,
                    line,
                    column,
                    message,
                } => Error::Config {
                    key: format!("{key}.{k}"),
                    line,
                    column,
                    message,
                },
                other => other,
            }
        };
        let part_i = self.part_i.to_scenario(&format!("{name}-i")).map_err(prefix("part_i"))?;
        let part_ii = self.part_ii.to_scenario(&format!("{name}-ii")).map_err(prefix("part_ii"))?;
        let barrier = match &self.barrier {
            Some(b) => {
                if !(b.c > 0.0 && b.c.is_finite()) {
                    return Err(invalid("barrier.c", "must be positive"));
                }
                if b.beta.is_some_and(|beta| !(beta > 0.0 && beta.is_finite())) {
                    return Err(invalid("barrier.beta", "must be positive"));
                }
                BarrierSpec { c: b.c, beta: b.beta }
            }
            None => BarrierSpec::default(),
        };
        Ok(CorollarySetup {
            part_i,
            part_ii,
            barrier,
        })
    }
}

/// Best-effort line of the last key of a dotted path in `text`, for
/// diagnostics raised after parsing.
pub fn locate(text: &str, key: &str) -> Option<usize> {
    let mut offset = 0;
    for segment in key.split('.') {
        let needle = format!("\"{segment}\"");
        offset += text[offset..].find(&needle)?;
    }
    Some(text[..offset].matches('\n').count() + 1)
}

/// Parses a scenario document and builds the scenario, attaching line
/// numbers to validation diagnostics where the key can be found.
pub fn load_scenario(text: &str, fallback_name: &str) -> Result<(ScenarioConfig, Scenario)> {
    let cfg: ScenarioConfig = parse(text)?;
    let scenario = cfg.to_scenario(fallback_name).map_err(|e| with_line(text, e))?;
    Ok((cfg, scenario))
}

pub fn load_reproduce(text: &str) -> Result<(ReproduceConfig, CorollarySetup)> {
    let cfg: ReproduceConfig = parse(text)?;
    let setup = cfg.to_setup().map_err(|e| with_line(text, e))?;
    Ok((cfg, setup))
}

fn with_line(text: &str, e: Error) -> Error {
    match e {
        Error::Config {
            key,
            line: None,
            column,
            message,
        } => Error::Config {
            line: locate(text, &key),
            key,
            column,
            message,
        },
        other => other,
    }
}
