use serde::{Deserialize, Serialize};

/// The three planar states the RHONN identifies, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarState {
    /// Longitudinal velocity, m/s.
    pub vx: f64,
    /// Lateral velocity, m/s.
    pub vy: f64,
    /// Yaw rate, rad/s.
    pub yaw_rate: f64,
}

impl PlanarState {
    pub const fn new(vx: f64, vy: f64, yaw_rate: f64) -> Self {
        Self { vx, vy, yaw_rate }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.yaw_rate]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.yaw_rate.is_finite()
    }
}

/// Inputs of the identified model: total drive torque, external yaw moment
/// and steering-wheel angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlCommand {
    /// Total driving torque T1+T2+T3+T4, N·m.
    pub total_torque: f64,
    /// Right-minus-left wheel torque difference, N·m.
    pub yaw_moment: f64,
    /// Steering-wheel angle, rad (positive turns left).
    pub steer_wheel: f64,
}

impl ControlCommand {
    pub const fn new(total_torque: f64, yaw_moment: f64, steer_wheel: f64) -> Self {
        Self {
            total_torque,
            yaw_moment,
            steer_wheel,
        }
    }
}
