//! Suite configuration: TOML (or JSON) describing scenarios to run.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::ClientConfig;
use crate::costmap::{CostMapKind, CostMapParams};
use crate::frame::WindowSpec;
use crate::navigator::{EpisodeSettings, NavParams, PlannerKind};
use crate::planner::{MppiParams, PrimitiveParams};
use crate::world::{SensorNoiseModel, VehicleParams, VehicleState, WorldMap, WorldSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid config at `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Ablation arm applied on top of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The scenario as configured.
    Ours,
    /// Height-only cost map instead of semantic elevation.
    NoCse,
    /// Motion primitives instead of MPPI.
    NoMppi,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ours => "ours",
            Variant::NoCse => "no_cse",
            Variant::NoMppi => "no_mppi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_dt() -> f64 {
    1.0 / 40.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Free-form route instruction.
    pub instruction: String,
    #[serde(default)]
    pub converter: ClientConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub planner: PlannerKind,
    #[serde(default = "default_costmap_kind")]
    pub costmap: CostMapKind,
    #[serde(default)]
    pub tick_budget: Option<u64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub start: StartPose,
    #[serde(default)]
    pub world: Option<WorldSpec>,
    /// TOML or JSON world spec, relative to the suite file.
    #[serde(default)]
    pub world_file: Option<PathBuf>,
    #[serde(default)]
    pub noise: SensorNoiseModel,
    #[serde(default)]
    pub nav: NavParams,
    #[serde(default)]
    pub mppi: MppiParams,
    #[serde(default)]
    pub primitives: PrimitiveParams,
    #[serde(default)]
    pub costmap_params: CostMapParams,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub window: WindowSpec,
}

fn default_costmap_kind() -> CostMapKind {
    CostMapKind::SemanticElevation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Each scenario runs once per variant; empty means `ours` only.
    #[serde(default)]
    pub variants: Vec<Variant>,
    pub scenario: Vec<ScenarioConfig>,
}

/// A scenario with its world built and paths resolved.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub world: WorldMap,
}

impl LoadedScenario {
    pub fn start_state(&self) -> VehicleState {
        VehicleState::new(self.config.start.x, self.config.start.y, self.config.start.heading, 0.0)
    }

    pub fn settings(&self, variant: Variant, seed: u64) -> EpisodeSettings {
        let c = &self.config;
        let mut s = EpisodeSettings {
            planner: c.planner,
            costmap_kind: c.costmap,
            costmap: c.costmap_params,
            mppi: c.mppi,
            primitives: c.primitives,
            nav: c.nav,
            vehicle: c.vehicle,
            noise: SensorNoiseModel { seed, ..c.noise },
            window: c.window,
            dt: c.dt,
            tick_budget: c.tick_budget,
            seed,
            keep_snapshots: false,
        };
        match variant {
            Variant::Ours => {}
            Variant::NoCse => s.costmap_kind = CostMapKind::HeightOnly,
            Variant::NoMppi => s.planner = PlannerKind::Primitives,
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct LoadedSuite {
    pub name: String,
    pub variants: Vec<Variant>,
    pub scenarios: Vec<LoadedScenario>,
}

fn parse_value(text: &str, json: bool) -> Result<serde_json::Value, ConfigError> {
    if json {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    } else {
        let v: toml::Value = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        serde_json::to_value(v).map_err(|e| ConfigError::Syntax(e.to_string()))
    }
}

fn typed<T: for<'de> Deserialize<'de>>(value: serde_json::Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = match (prefix.is_empty(), path.as_str()) {
            (true, p) => p.to_string(),
            (false, ".") => prefix.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        ConfigError::invalid(field, e.into_inner().to_string())
    })
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl SuiteConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        typed(parse_value(text, false)?, "")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        typed(parse_value(text, true)?, "")
    }

    /// Reads a suite file, resolves relative paths against its directory, and
    /// validates every scenario.
    pub fn load(path: &Path) -> Result<LoadedSuite, ConfigError> {
        let text = read(path)?;
        let cfg: SuiteConfig = typed(parse_value(&text, is_json(path))?, "")?;
        let base = path.parent().unwrap_or(Path::new("."));
        let default_name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        cfg.resolve(base, default_name)
    }

    pub fn resolve(mut self, base: &Path, default_name: String) -> Result<LoadedSuite, ConfigError> {
        if self.scenario.is_empty() {
            return Err(ConfigError::invalid("scenario", "at least one scenario is required"));
        }
        let mut variants = self.variants.clone();
        let mut seen_variants = BTreeSet::new();
        variants.retain(|v| seen_variants.insert(*v));
        if variants.is_empty() {
            variants.push(Variant::Ours);
        }
        let mut names = BTreeSet::new();
        let mut scenarios = Vec::new();
        for (i, sc) in self.scenario.iter_mut().enumerate() {
            let at = |f: &str| format!("scenario[{i}].{f}");
            if sc.name.trim().is_empty() || sc.name.contains(['/', '\\']) {
                return Err(ConfigError::invalid(at("name"), "must be non-empty without path separators"));
            }
            if !names.insert(sc.name.clone()) {
                return Err(ConfigError::invalid(at("name"), format!("duplicate scenario name `{}`", sc.name)));
            }
            if sc.instruction.trim().is_empty() {
                return Err(ConfigError::invalid(at("instruction"), "must not be empty"));
            }
            if sc.seeds.is_empty() {
                return Err(ConfigError::invalid(at("seeds"), "at least one seed is required"));
            }
            if !(sc.dt > 0.0) {
                return Err(ConfigError::invalid(at("dt"), "must be positive"));
            }
            if sc.tick_budget == Some(0) {
                return Err(ConfigError::invalid(at("tick_budget"), "must be >= 1"));
            }
            sc.noise.validate().map_err(|m| ConfigError::invalid(at("noise"), m))?;
            sc.mppi.validate().map_err(|m| ConfigError::invalid(at("mppi"), m))?;
            sc.costmap_params
                .validate()
                .map_err(|m| ConfigError::invalid(at("costmap_params"), m.to_string()))?;
            if sc.primitives.count == 0 {
                return Err(ConfigError::invalid(at("primitives"), "count must be >= 1"));
            }
            if sc.window.width < 2 || sc.window.height < 2 || !(sc.window.resolution > 0.0) {
                return Err(ConfigError::invalid(at("window"), "needs at least 2x2 cells and positive resolution"));
            }
            let nav = &sc.nav;
            if !(nav.reach_threshold > 0.0 && nav.cruise_speed > 0.0 && nav.servo_gain >= 0.0) {
                return Err(ConfigError::invalid(at("nav"), "reach_threshold and cruise_speed must be positive"));
            }
            let v = &sc.vehicle;
            if !(v.wheelbase > 0.0 && v.steer_max > 0.0 && v.v_max > 0.0) {
                return Err(ConfigError::invalid(at("vehicle"), "wheelbase, steer_max and v_max must be positive"));
            }
            if let Some(p) = &sc.converter.fixture_path {
                if p.is_relative() {
                    sc.converter.fixture_path = Some(base.join(p));
                }
            }
            let spec = match (&sc.world, &sc.world_file) {
                (Some(w), None) => w.clone(),
                (None, Some(f)) => {
                    let full = base.join(f);
                    sc.world_file = Some(full.clone());
                    let text = read(&full)?;
                    typed(parse_value(&text, is_json(&full))?, &at("world_file"))?
                }
                _ => return Err(ConfigError::invalid(at("world"), "exactly one of `world` or `world_file` is required")),
            };
            let world = spec.build().map_err(|e| ConfigError::invalid(at("world"), e.to_string()))?;
            if !world.contains(sc.start.x, sc.start.y) {
                return Err(ConfigError::invalid(at("start"), "start pose lies outside the world"));
            }
            scenarios.push(LoadedScenario {
                config: sc.clone(),
                world,
            });
        }
        Ok(LoadedSuite {
            name: self.name.unwrap_or(default_name),
            variants,
            scenarios,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[scenario]]
        name = "s"
        instruction = "Go straight to a cone, then stop."
        start = { x = 1.0, y = 1.0 }
        [scenario.world]
        width_m = 4.0
        height_m = 4.0
    "#;

    fn load(text: &str) -> Result<LoadedSuite, ConfigError> {
        SuiteConfig::from_toml_str(text)?.resolve(Path::new("."), "suite".into())
    }

    #[test]
    fn minimal_suite_loads_with_defaults() {
        let s = load(MINIMAL).unwrap();
        assert_eq!(s.name, "suite");
        assert_eq!(s.variants, [Variant::Ours]);
        let sc = &s.scenarios[0];
        assert_eq!(sc.config.seeds, [0]);
        assert_eq!(sc.config.planner, PlannerKind::Mppi);
        assert_eq!(sc.config.mppi.samples, 5000);
        assert_eq!(sc.world.semantics().dims(), (40, 40));
    }

    #[test]
    fn field_path_in_errors() {
        let bad = MINIMAL.replace("[scenario.world]", "[scenario.noise]\ndetect_fn_prob = \"x\"\n[scenario.world]");
        match load(&bad) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "scenario[0].noise.detect_fn_prob"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("[scenario.world]", "[scenario.noise]\ndetect_fn_prob = 1.5\n[scenario.world]");
        match load(&bad) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "scenario[0].noise"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("x = 1.0, y = 1.0", "x = 9.0, y = 1.0");
        assert!(matches!(load(&bad), Err(ConfigError::Invalid { field, .. }) if field == "scenario[0].start"));
        assert!(matches!(load("scenario = 3"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(load("[[scenario]"), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn variants_override_settings() {
        let s = load(&format!("variants = [\"ours\", \"no_cse\", \"no_mppi\", \"ours\"]\n{MINIMAL}")).unwrap();
        assert_eq!(s.variants, [Variant::Ours, Variant::NoCse, Variant::NoMppi]);
        let sc = &s.scenarios[0];
        assert_eq!(sc.settings(Variant::NoCse, 3).costmap_kind, CostMapKind::HeightOnly);
        assert_eq!(sc.settings(Variant::NoMppi, 3).planner, PlannerKind::Primitives);
        assert_eq!(sc.settings(Variant::Ours, 3).noise.seed, 3);
    }

    #[test]
    fn json_equivalent() {
        let json = r#"{"scenario":[{"name":"s","instruction":"Go straight to a cone, then stop.",
            "start":{"x":1,"y":1},"world":{"width_m":4,"height_m":4}}]}"#;
        let a = SuiteConfig::from_json_str(json).unwrap();
        let b = SuiteConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(a, b);
    }
}
