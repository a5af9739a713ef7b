//! Scenario documents shipped with the crate.

use crate::config::{load_reproduce, load_scenario, ReproduceConfig, ScenarioConfig};
use crate::error::Result;
use crate::experiments::{CorollarySetup, Scenario};

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../presets/", $name, ".json")))
    };
}

/// Scenario presets as `(name, JSON)`.
pub const SCENARIOS: &[(&str, &str)] = &[
    preset!("scenario-u"),
    preset!("scenario-nu"),
    preset!("corollary-2.6-i"),
    preset!("corollary-2.6-ii"),
    preset!("hyperbolic-t22"),
    preset!("stretched-t23"),
    preset!("sinh-solve"),
    preset!("powerlaw-l2-uniqueness"),
    preset!("powerlaw-l2-multiplicity"),
    preset!("euclidean-n2-sigma3-multiplicity"),
    preset!("inward-drift-uniqueness"),
    preset!("marginal-unknown"),
];

/// The headline presets, one per theorem and regime.
pub const PRIMARY: [&str; 6] = [
    "scenario-u",
    "scenario-nu",
    "corollary-2.6-i",
    "corollary-2.6-ii",
    "hyperbolic-t22",
    "stretched-t23",
];

/// Reproduction documents as `(name, JSON)`.
pub const REPRODUCE: &[(&str, &str)] = &[preset!("corollary-2.6")];

/// Raw JSON of a scenario or reproduction preset.
pub fn text(name: &str) -> Option<&'static str> {
    SCENARIOS
        .iter()
        .chain(REPRODUCE)
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().chain(REPRODUCE).map(|(n, _)| *n)
}

pub fn scenario(name: &str) -> Option<Result<(ScenarioConfig, Scenario)>> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, t)| load_scenario(t, n))
}

pub fn reproduce(name: &str) -> Option<Result<(ReproduceConfig, CorollarySetup)>> {
    REPRODUCE.iter().find(|(n, _)| *n == name).map(|(_, t)| load_reproduce(t))
}
