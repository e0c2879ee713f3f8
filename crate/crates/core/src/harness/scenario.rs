//! Scenario and simulation config files (TOML).
//!
//! ```toml
//! schema_version = 1
//! name = "case_study"
//! pad_type = "visual"          # visual | active_ir | passive_ir
//! seed = 7
//! max_sim_time_s = 300.0       # optional, default 300
//! pad_yaw_deg = 30.0           # optional, default 0
//! config = "sim.toml"          # optional, relative to the scenario file
//!
//! [start]
//! distance_m = 20.0            # horizontal distance from the pad
//! altitude_m = 10.0            # height above the pad
//! bearing_deg = 180.0          # optional: compass direction pad -> drone
//! yaw_deg = 0.0                # optional: initial drone heading
//!
//! [[obscuration]]
//! t_start = 40.0
//! t_end = 44.0
//! pad_displacement = [2.0, 0.0]  # optional, applied at t_end
//!
//! [[gust]]
//! t_start = 10.0
//! t_end = 12.0
//! velocity_offset = [1.0, 0.0, 0.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::sensing::{CameraRig, ObscurationEvent, SensingConfig};
use crate::world::{DynamicsConfig, PadType, WindGust};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_SIM_TIME_S: f64 = 300.0;
/// Environment variable naming a simulation config file; overrides `config` in scenarios.
pub const CONFIG_ENV: &str = "TAGLAND_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub distance_m: f64,
    pub altitude_m: f64,
    #[serde(default)]
    pub bearing_deg: f64,
    #[serde(default)]
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub pad_type: PadType,
    pub start: StartPose,
    #[serde(default)]
    pub pad_yaw_deg: f64,
    #[serde(default = "default_max_time")]
    pub max_sim_time_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
    #[serde(default, rename = "obscuration", skip_serializing_if = "Vec::is_empty")]
    pub obscurations: Vec<ObscurationEvent>,
    #[serde(default, rename = "gust", skip_serializing_if = "Vec::is_empty")]
    pub gusts: Vec<WindGust>,
}

fn default_max_time() -> f64 {
    DEFAULT_MAX_SIM_TIME_S
}

impl Scenario {
    pub fn new(name: impl Into<String>, pad_type: PadType, distance_m: f64, altitude_m: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            pad_type,
            start: StartPose { distance_m, altitude_m, bearing_deg: 0.0, yaw_deg: 0.0 },
            pad_yaw_deg: 0.0,
            max_sim_time_s: DEFAULT_MAX_SIM_TIME_S,
            seed: 0,
            config: None,
            obscurations: Vec::new(),
            gusts: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema_version: expected {}, got {}",
                SCHEMA_VERSION, self.schema_version
            )));
        }
        let checks = [
            ("start.distance_m", self.start.distance_m),
            ("start.altitude_m", self.start.altitude_m),
            ("max_sim_time_s", self.max_sim_time_s),
        ];
        for (field, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parse(format!("{}: must be positive, got {}", field, value)));
            }
        }
        for (field, value) in [
            ("start.bearing_deg", self.start.bearing_deg),
            ("start.yaw_deg", self.start.yaw_deg),
            ("pad_yaw_deg", self.pad_yaw_deg),
        ] {
            if !value.is_finite() {
                return Err(Error::Parse(format!("{}: must be finite", field)));
            }
        }
        for (i, ev) in self.obscurations.iter().enumerate() {
            ev.validate().map_err(|e| Error::Parse(format!("obscuration[{}]: {}", i, e)))?;
        }
        for (i, g) in self.gusts.iter().enumerate() {
            g.validate().map_err(|e| Error::Parse(format!("gust[{}]: {}", i, e)))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut scenario = parse_scenario(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {}", path.display(), msg)),
        other => other,
    })?;
    if let (Some(cfg), Some(dir)) = (scenario.config.as_ref(), path.parent()) {
        if cfg.is_relative() {
            scenario.config = Some(dir.join(cfg));
        }
    }
    Ok(scenario)
}

/// Everything about the simulated vehicle that is not part of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub dt_s: f64,
    pub rig: CameraRig,
    pub dynamics: DynamicsConfig,
    pub sensing: SensingConfig,
    pub controller: ControllerConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dt_s: 0.05,
            rig: CameraRig::default(),
            dynamics: DynamicsConfig::default(),
            sensing: SensingConfig::default(),
            controller: ControllerConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("schema_version: expected {}, got {}", SCHEMA_VERSION, self.schema_version)));
        }
        if !(self.dt_s > 0.0 && self.dt_s <= crate::world::MAX_DT) {
            return Err(Error::validation("dt_s", format!("{} not in (0, {}]", self.dt_s, crate::world::MAX_DT)));
        }
        self.rig.validate()?;
        self.dynamics.validate()?;
        self.sensing.validate()?;
        self.controller.validate()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {}", path.display(), msg)),
            other => other,
        })
    }

    /// Config for a scenario: `$TAGLAND_CONFIG`, then the scenario's `config`, then defaults.
    pub fn resolve(scenario: &Scenario) -> Result<Self> {
        if let Some(path) = std::env::var_os(CONFIG_ENV) {
            return Self::load(Path::new(&path));
        }
        match &scenario.config {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }
}
