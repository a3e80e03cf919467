//! Driver model: pure-pursuit steering and a PI speed holder.
//!
//! Steering angles are positive to the left (counter-clockwise yaw), the
//! same convention as the yaw rate and lateral velocity.

use serde::{Deserialize, Serialize};

use super::path::{Path, Projection};
use super::{PlantError, VehicleParams, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverConfig {
    /// Look-ahead time, s.
    pub preview_time: f64,
    /// Look-ahead floor, m.
    pub min_preview: f64,
    /// Steering-wheel saturation, deg.
    pub max_wheel_angle_deg: f64,
    pub speed_kp: f64,
    pub speed_ki: f64,
    /// Total drive torque limit of the speed holder, N·m.
    pub max_drive_torque: f64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            preview_time: 0.6,
            min_preview: 5.0,
            max_wheel_angle_deg: 500.0,
            speed_kp: 800.0,
            speed_ki: 50.0,
            max_drive_torque: 800.0,
        }
    }
}

/// Steering-wheel angle command toward a preview point `V_x·preview_time`
/// ahead along the path. Returns the angle (rad) and the current projection.
pub fn driver_steer(
    s: &VehicleState,
    path: &Path,
    cfg: &DriverConfig,
    vehicle: &VehicleParams,
    hint: Option<usize>,
) -> Result<(f64, Projection), PlantError> {
    let proj = path.project(s.x, s.y, hint);
    let lookahead = (s.vx * cfg.preview_time).max(cfg.min_preview);
    let target = proj.station + lookahead;
    let (tx, ty) = path.point_at(target)?;
    let (dx, dy) = (tx - s.x, ty - s.y);
    let (sh, ch) = s.heading.sin_cos();
    let y_body = -sh * dx + ch * dy;
    let d2 = (dx * dx + dy * dy).max(1e-6);
    let road = (2.0 * vehicle.wheelbase() * y_body / d2).atan();
    let limit = cfg.max_wheel_angle_deg.to_radians();
    Ok(((road * vehicle.steering_ratio).clamp(-limit, limit), proj))
}

/// PI controller on longitudinal speed producing total drive torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedController {
    pub target: f64,
    kp: f64,
    ki: f64,
    limit: f64,
    integral: f64,
}

impl SpeedController {
    pub fn new(target: f64, cfg: &DriverConfig) -> Self {
        Self {
            target,
            kp: cfg.speed_kp,
            ki: cfg.speed_ki,
            limit: cfg.max_drive_torque,
            integral: 0.0,
        }
    }

    pub fn update(&mut self, vx: f64, dt: f64) -> f64 {
        let e = self.target - vx;
        let raw = self.kp * e + self.ki * (self.integral + e * dt);
        // Conditional integration as anti-windup.
        if raw.abs() < self.limit {
            self.integral += e * dt;
        }
        (self.kp * e + self.ki * self.integral).clamp(-self.limit, self.limit)
    }
}
