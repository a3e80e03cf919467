use serde::{Deserialize, Serialize};

use super::PlantError;

/// Vehicle specification. Cornering stiffnesses are negative: F_y = C·α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// kg·m²
    pub yaw_inertia: f64,
    /// Front axle to CG, m.
    pub lf: f64,
    /// Rear axle to CG, m.
    pub lr: f64,
    /// m
    pub track_width: f64,
    /// kg·m²
    pub wheel_inertia: f64,
    /// m
    pub wheel_radius: f64,
    /// Front axle cornering stiffness, N/rad.
    pub cf: f64,
    /// Rear axle cornering stiffness, N/rad.
    pub cr: f64,
    /// Road adhesion coefficient.
    pub mu: f64,
    /// CG height for load transfer, m.
    pub cg_height: f64,
    /// Steering-wheel to road-wheel ratio.
    pub steering_ratio: f64,
    /// Per-motor torque limit, N·m.
    pub motor_torque_cap: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 2070.0,
            yaw_inertia: 3658.0,
            lf: 1.362,
            lr: 1.308,
            track_width: 1.715,
            wheel_inertia: 2.4,
            wheel_radius: 0.358,
            cf: -108_350.0,
            cr: -105_898.0,
            mu: 0.7,
            cg_height: 0.55,
            steering_ratio: 16.0,
            motor_torque_cap: 400.0,
        }
    }
}

impl VehicleParams {
    pub fn wheelbase(&self) -> f64 {
        self.lf + self.lr
    }

    /// Wheel contact points in the body frame (x forward, y left).
    pub fn wheel_positions(&self) -> [(f64, f64); 4] {
        let h = 0.5 * self.track_width;
        [(self.lf, h), (self.lf, -h), (-self.lr, h), (-self.lr, -h)]
    }

    /// Understeer gradient of the linear bicycle model, rad·s²/m.
    pub fn understeer_gradient(&self) -> f64 {
        let (cf, cr) = (self.cf.abs(), self.cr.abs());
        self.mass * (self.lr * cr - self.lf * cf) / (self.wheelbase() * cf * cr)
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let positive = [
            ("mass", self.mass),
            ("yaw_inertia", self.yaw_inertia),
            ("lf", self.lf),
            ("lr", self.lr),
            ("track_width", self.track_width),
            ("wheel_inertia", self.wheel_inertia),
            ("wheel_radius", self.wheel_radius),
            ("mu", self.mu),
            ("cg_height", self.cg_height),
            ("steering_ratio", self.steering_ratio),
            ("motor_torque_cap", self.motor_torque_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlantError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cf < 0.0 && self.cr < 0.0) {
            return Err(PlantError::InvalidParameter(
                "cornering stiffnesses must be negative".into(),
            ));
        }
        Ok(())
    }
}
