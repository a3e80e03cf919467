//! Scenario configuration, read from a sectioned TOML file.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::control::{ControllerKind, NmpcConfig};
use crate::ekf::{EkfConfig, RegressorSource};
use crate::plant::driver::DriverConfig;
use crate::plant::path::{PathConfig, ScenarioKind};
use crate::plant::tire::TireConfig;
use crate::plant::{VehicleParams, MAX_PLANT_DT};
use crate::reference::SearchConfig;
use crate::rhonn::RhonnConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    /// Plant integration step, s.
    pub plant_dt: f64,
    /// Control and identification period, s.
    pub control_dt: f64,
    /// Controller activation time, s. Defaults per scenario when absent.
    pub activation_time: Option<f64>,
    /// Hard stop, s.
    pub max_time: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            plant_dt: 1e-3,
            control_dt: 0.05,
            activation_time: None,
            max_time: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Estimation statistics skip this initial window, s.
    pub warmup: f64,
    /// Path deviation that counts as leaving the lane, m.
    pub deviation_limit: f64,
    /// Runs stop once |β| exceeds this, deg.
    pub lost_sideslip_deg: f64,
    /// Runs stop once the lateral deviation exceeds this, m.
    pub lost_deviation: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            warmup: 1.0,
            deviation_limit: 1.0,
            lost_sideslip_deg: 30.0,
            lost_deviation: 10.0,
        }
    }
}

/// White measurement noise on the planar states fed to the identifier and
/// controllers. Zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub vx_std: f64,
    pub vy_std: f64,
    pub yaw_rate_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierConfig {
    /// Bisection bracket, km/h.
    pub v_min: f64,
    pub v_max: f64,
    pub resolution: f64,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            v_min: 20.0,
            v_max: 110.0,
            resolution: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub scenario: ScenarioKind,
    pub controller: ControllerKind,
    /// Road adhesion; overrides `vehicle.mu`.
    pub mu: f64,
    /// Entry speed, km/h.
    pub v0: f64,
    /// Run the identifier and estimators only, no yaw moment.
    pub identification_only: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub timing: TimingConfig,
    pub vehicle: VehicleParams,
    pub tire: TireConfig,
    pub path: PathConfig,
    pub driver: DriverConfig,
    pub rhonn: RhonnConfig,
    pub ekf: EkfConfig,
    pub regressor: RegressorSource,
    pub search: SearchConfig,
    pub nmpc: NmpcConfig,
    /// Internal step of the MF prediction model, s.
    pub nmpc_mf_substep: f64,
    /// Internal step of the 7-DoF estimators, s.
    pub estimator_substep: f64,
    pub metrics: MetricsConfig,
    pub noise: NoiseConfig,
    pub frontier: FrontierConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            scenario: ScenarioKind::Dlc,
            controller: ControllerKind::NmpcRhonn,
            mu: 0.35,
            v0: 65.0,
            identification_only: false,
            seed: 0,
            out_dir: PathBuf::from("out"),
            timing: TimingConfig::default(),
            vehicle: VehicleParams::default(),
            tire: TireConfig::default(),
            path: PathConfig::default(),
            driver: DriverConfig::default(),
            rhonn: RhonnConfig::default(),
            ekf: EkfConfig::default(),
            regressor: RegressorSource::default(),
            search: SearchConfig::default(),
            nmpc: NmpcConfig::default(),
            nmpc_mf_substep: 5e-3,
            estimator_substep: 1e-3,
            metrics: MetricsConfig::default(),
            noise: NoiseConfig::default(),
            frontier: FrontierConfig::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ScenarioConfig {
    pub fn load(path: &FsPath) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration always serialises")
    }

    /// Vehicle parameters with the scenario adhesion applied.
    pub fn effective_vehicle(&self) -> VehicleParams {
        VehicleParams { mu: self.mu, ..self.vehicle }
    }

    pub fn activation_time(&self) -> f64 {
        self.timing.activation_time.unwrap_or(match self.scenario {
            ScenarioKind::Dlc => 0.0,
            ScenarioKind::SlipperyCurve => 5.0,
        })
    }

    /// Control ticks are an integer number of plant steps.
    pub fn plant_steps_per_tick(&self) -> usize {
        (self.timing.control_dt / self.timing.plant_dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if !(self.mu > 0.0 && self.mu <= 1.2) {
            return Err(invalid(format!("mu must be in (0, 1.2], got {}", self.mu)));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(invalid(format!("v0 must be positive, got {}", self.v0)));
        }
        let t = &self.timing;
        if !(t.plant_dt > 0.0 && t.plant_dt <= MAX_PLANT_DT) {
            return Err(invalid(format!("plant_dt must be in (0, {MAX_PLANT_DT}], got {}", t.plant_dt)));
        }
        let ratio = t.control_dt / t.plant_dt;
        if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
            return Err(invalid("control_dt must be a whole multiple of plant_dt"));
        }
        if !(t.max_time > 0.0) || t.activation_time.is_some_and(|a| !(a >= 0.0)) {
            return Err(invalid("max_time must be positive and activation_time non-negative"));
        }
        if !(self.path.spacing > 0.0) {
            return Err(invalid("path spacing must be positive"));
        }
        if !(self.nmpc_mf_substep > 0.0 && self.estimator_substep > 0.0) {
            return Err(invalid("model substeps must be positive"));
        }
        let n = &self.noise;
        if ![n.vx_std, n.vy_std, n.yaw_rate_std].iter().all(|s| *s >= 0.0 && s.is_finite()) {
            return Err(invalid("noise standard deviations must be non-negative"));
        }
        let f = &self.frontier;
        if !(f.v_min > 0.0 && f.v_max > f.v_min && f.resolution > 0.0) {
            return Err(invalid("frontier bracket must satisfy 0 < v_min < v_max and resolution > 0"));
        }
        self.effective_vehicle().validate().map_err(|e| invalid(e.to_string()))?;
        self.rhonn.sigmoids.validate().map_err(|e| invalid(e.to_string()))?;
        self.ekf.validate().map_err(|e| invalid(e.to_string()))?;
        self.search.validate().map_err(|e| invalid(e.to_string()))?;
        self.nmpc.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ScenarioConfig::from_toml("version = 1\nscenario = \"slippery_curve\"\nv0 = 85.0\n[nmpc]\ndm_max = 1200.0\n").unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::SlipperyCurve);
        assert_eq!(cfg.nmpc.dm_max, 1200.0);
        assert_eq!(cfg.nmpc.dm_min, -1600.0);
        assert_eq!(cfg.activation_time(), 5.0);
        assert_eq!(cfg.plant_steps_per_tick(), 50);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "version = 2",
            "mu = 1.5",
            "v0 = -3.0",
            "[timing]\nplant_dt = 0.002",
            "[timing]\ncontrol_dt = 0.0505",
            "unknown_key = 3",
            "[nmpc]\ndm_min = 5.0",
        ] {
            assert!(matches!(ScenarioConfig::from_toml(text), Err(HarnessError::Config(_))), "{text}");
        }
    }
}
