//! Run configuration, read from JSON or from `key = value` lines.
//!
//! In the line format nested fields use dotted keys (`ddpg.actor_lr = 5e-5`),
//! values are parsed as JSON when possible and taken as strings otherwise,
//! and `#` starts a comment.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::dynamics::{PhysConstants, VehicleProps, DEFAULT_HORIZON};
use crate::learner::DdpgConfig;
use crate::routing::PathMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSettings {
    pub n_vehicles: usize,
    pub mass: Range,
    pub f_max: Range,
    pub eta: Range,
    pub tau: Range,
    pub length: Range,
}

impl Default for VehicleSettings {
    fn default() -> Self {
        VehicleSettings {
            n_vehicles: 1,
            mass: Range::new(900.0, 1600.0),
            f_max: Range::new(3000.0, 8000.0),
            eta: Range::new(30.0, 70.0),
            tau: Range::new(0.8, 1.2),
            length: Range::new(3.5, 5.0),
        }
    }
}

impl VehicleSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let ranges =
            [("mass", self.mass), ("f_max", self.f_max), ("eta", self.eta), ("tau", self.tau), ("length", self.length)];
        for (name, r) in ranges {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                return Err(ConfigError::Invalid(format!("vehicles.{name}: need lo <= hi")));
            }
        }
        // The lower corner must itself be a valid vehicle.
        VehicleProps::new(self.mass.lo, self.f_max.lo, self.eta.lo, self.tau.lo, self.length.lo)
            .map_err(|e| ConfigError::Invalid(format!("vehicles: {e}")))?;
        Ok(())
    }
}

/// Sensor entries that can make up the agent's state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    V,
    VLimit,
    ALong,
    ALat,
    DNextCurve,
    RNextCurve,
    DCurveNextIntersection,
    DNextVehicleSamePath,
    DNextVehicleNextIntersection,
}

impl Feature {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub physics: PhysConstants<f64>,
    pub vehicles: VehicleSettings,
    pub ddpg: DdpgConfig,
    pub path_mode: PathMode,
    /// When non-empty, every directed edge gets a speed limit drawn
    /// uniformly from these values before the run starts.
    pub speed_limits: Vec<f64>,
    /// Sensor readings fed to the agent, in order.
    pub features: Vec<Feature>,
    /// Every feature is divided by this before it reaches the networks.
    pub state_scale: f64,
    pub horizon: f64,
    /// Snapshots are published every this many ticks.
    pub snapshot_every: u64,
    /// Ticks per second when serving; 0 runs as fast as possible.
    pub tick_rate: f64,
    pub log_interval: u64,
    pub checkpoint_interval: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            physics: PhysConstants::default(),
            vehicles: VehicleSettings::default(),
            ddpg: DdpgConfig::default(),
            path_mode: PathMode::Shortest,
            speed_limits: Vec::new(),
            features: vec![Feature::V, Feature::VLimit],
            state_scale: 10.0,
            horizon: DEFAULT_HORIZON,
            snapshot_every: 10,
            tick_rate: 0.0,
            log_interval: 100,
            checkpoint_interval: 10_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.physics.validate().map_err(|e| ConfigError::Invalid(format!("physics: {e}")))?;
        self.vehicles.validate()?;
        self.ddpg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.speed_limits.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(ConfigError::Invalid("speed limits must be positive".into()));
        }
        if self.features.is_empty() {
            return Err(ConfigError::Invalid("at least one state feature is needed".into()));
        }
        if !(self.state_scale > 0.0 && self.state_scale.is_finite()) {
            return Err(ConfigError::Invalid("state_scale must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::Invalid("horizon must be positive".into()));
        }
        if self.snapshot_every == 0 || self.log_interval == 0 || self.checkpoint_interval == 0 {
            return Err(ConfigError::Invalid("intervals must be positive".into()));
        }
        if !(self.tick_rate >= 0.0 && self.tick_rate.is_finite()) {
            return Err(ConfigError::Invalid("tick_rate must be non-negative".into()));
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.features.len()
    }

    /// Parses JSON (when the text starts with `{`) or `key = value` lines.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError::Syntax { line: e.line(), message: e.to_string() })?
        } else {
            lines_to_json(text)?
        };
        let cfg: SimConfig = serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn lines_to_json(text: &str) -> Result<Value, ConfigError> {
    let mut root = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| ConfigError::Syntax { line: i + 1, message: message.to_string() };
        let (key, val) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
        let key = key.trim();
        let val = val.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(err("empty key"));
        }
        let parsed = serde_json::from_str(val).unwrap_or_else(|_| Value::String(val.to_string()));
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().expect("split yields one part");
        let mut node = &mut root;
        for p in parts {
            let entry = node.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
            node = entry.as_object_mut().ok_or_else(|| err("key used both as value and as section"))?;
        }
        if node.insert(last.to_string(), parsed).is_some() {
            return Err(err("duplicate key"));
        }
    }
    Ok(Value::Object(root))
}
