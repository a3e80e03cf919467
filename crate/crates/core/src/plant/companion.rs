//! Small-angle 7-DoF physics models.
//!
//! These follow the textbook Newton–Euler planar equations with the steer
//! angle linearised, static wheel loads and pure-slip tires. They serve as
//! the 7DoF-MF and 7DoF-LI estimators and as the NMPC-MF prediction model.
//! The drive-torque reaction of the front wheels, (T − I_w·ẇ)/r, is
//! projected onto the lateral axis through δ_f.

use super::tire::{linear_forces, mf_forces, static_loads, wheel_slips, SlipKinematics, TireConfig, TireForces, TireModelKind};
use super::{Derivative, PlantError, VehicleParams, VehicleState, WHEELS};

#[derive(Debug, Clone)]
pub struct CompanionModel {
    pub params: VehicleParams,
    pub tire: TireConfig,
    pub kind: TireModelKind,
    /// Internal RK4 step, s.
    pub substep: f64,
    loads: [f64; WHEELS],
}

impl CompanionModel {
    pub fn new(params: VehicleParams, tire: TireConfig, kind: TireModelKind, substep: f64) -> Result<Self, PlantError> {
        params.validate()?;
        if !(substep > 0.0) {
            return Err(PlantError::InvalidParameter(format!("substep must be positive, got {substep}")));
        }
        Ok(Self {
            loads: static_loads(&params),
            params,
            tire,
            kind,
            substep,
        })
    }

    pub fn forces(&self, s: &VehicleState, steer_front: f64) -> Result<TireForces, PlantError> {
        let (alpha, kappa) = wheel_slips(s, steer_front, &self.params, SlipKinematics::SmallAngle)?;
        Ok(match self.kind {
            TireModelKind::MagicFormula => mf_forces(&alpha, &kappa, &self.loads, self.params.mu, &self.tire, false),
            TireModelKind::Linear => linear_forces(&alpha, &kappa, &self.loads, &self.params, &self.tire),
        })
    }

    fn rhs(&self, s: &VehicleState, t: &[f64; WHEELS], delta: f64, f: &TireForces) -> Derivative {
        let p = &self.params;
        let (m, r, iw, iz) = (p.mass, p.wheel_radius, p.wheel_inertia, p.yaw_inertia);
        let mut wd = [0.0; WHEELS];
        for i in 0..WHEELS {
            wd[i] = (t[i] - r * f.fx[i]) / iw;
        }
        let half_b = p.track_width / (2.0 * iz);
        let vx_dot = (t.iter().sum::<f64>()) / (m * r) - iw / (m * r) * wd.iter().sum::<f64>()
            - (f.fy[0] + f.fy[1]) * delta / m
            + s.vy * s.yaw_rate;
        let vy_dot = ((t[0] + t[1]) / (m * r) - iw / (m * r) * (wd[0] + wd[1])) * delta
            + f.fy.iter().sum::<f64>() / m
            - s.vx * s.yaw_rate;
        let r_dot = half_b / r * (t[1] + t[3] - t[0] - t[2]) - half_b * iw / r * (wd[1] + wd[3] - wd[0] - wd[2])
            + (f.fy[0] + f.fy[1]) * p.lf / iz
            - (f.fy[2] + f.fy[3]) * p.lr / iz;
        let (sh, ch) = s.heading.sin_cos();
        Derivative {
            vx: vx_dot,
            vy: vy_dot,
            yaw_rate: r_dot,
            heading: s.yaw_rate,
            x: s.vx * ch - s.vy * sh,
            y: s.vx * sh + s.vy * ch,
            wheel: wd,
        }
    }

    /// Single explicit Euler step with externally supplied tire forces.
    pub fn euler_with_forces(&self, s: &VehicleState, torques: &[f64; WHEELS], steer_front: f64, f: &TireForces, dt: f64) -> VehicleState {
        s.add_scaled(&self.rhs(s, torques, steer_front, f), dt)
    }

    fn rk4(&self, s: &VehicleState, t: &[f64; WHEELS], delta: f64, h: f64) -> Result<VehicleState, PlantError> {
        let k1 = self.rhs(s, t, delta, &self.forces(s, delta)?);
        let s2 = s.add_scaled(&k1, 0.5 * h);
        let k2 = self.rhs(&s2, t, delta, &self.forces(&s2, delta)?);
        let s3 = s.add_scaled(&k2, 0.5 * h);
        let k3 = self.rhs(&s3, t, delta, &self.forces(&s3, delta)?);
        let s4 = s.add_scaled(&k3, h);
        let k4 = self.rhs(&s4, t, delta, &self.forces(&s4, delta)?);
        Ok(s.add_scaled(&Derivative::combine([&k1, &k2, &k3, &k4]), h))
    }

    /// Advances `dt` seconds with inputs held, in `substep` increments.
    pub fn step(&self, s: &VehicleState, torques: &[f64; WHEELS], steer_front: f64, dt: f64) -> Result<VehicleState, PlantError> {
        let n = (dt / self.substep).round().max(1.0) as usize;
        let h = dt / n as f64;
        let mut x = *s;
        for _ in 0..n {
            x = self.rk4(&x, torques, steer_front, h)?;
            if !x.is_finite() {
                return Err(PlantError::NonFinite);
            }
        }
        Ok(x)
    }
}
