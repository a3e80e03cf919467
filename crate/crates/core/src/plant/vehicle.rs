use serde::{Deserialize, Serialize};

use super::tire::{tire_forces_mf, vertical_loads, TireConfig, TireForces};
use super::{PlantError, VehicleParams, WHEELS};
use crate::PlanarState;

/// Largest plant step accepted by [`integrate`], s.
pub const MAX_PLANT_DT: f64 = 1e-3;

/// Body velocities, pose and wheel spin of the 7-DoF plant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// m/s, body frame
    pub vx: f64,
    /// m/s, body frame, positive left
    pub vy: f64,
    /// rad/s, positive counter-clockwise
    pub yaw_rate: f64,
    /// rad
    pub heading: f64,
    /// m, global
    pub x: f64,
    /// m, global
    pub y: f64,
    /// rad/s
    pub wheel_speeds: [f64; WHEELS],
}

impl VehicleState {
    /// Straight free rolling at `vx` with matching wheel speeds.
    pub fn rolling(vx: f64, p: &VehicleParams) -> Self {
        Self {
            vx,
            wheel_speeds: [vx / p.wheel_radius; WHEELS],
            ..Default::default()
        }
    }

    pub fn planar(&self) -> PlanarState {
        PlanarState::new(self.vx, self.vy, self.yaw_rate)
    }

    /// Sideslip angle atan(V_y/V_x), rad.
    pub fn sideslip(&self) -> f64 {
        self.vy.atan2(self.vx)
    }

    pub fn is_finite(&self) -> bool {
        [self.vx, self.vy, self.yaw_rate, self.heading, self.x, self.y]
            .iter()
            .chain(self.wheel_speeds.iter())
            .all(|v| v.is_finite())
    }

    /// Translational, rotational and wheel kinetic energy, J.
    pub fn kinetic_energy(&self, p: &VehicleParams) -> f64 {
        0.5 * p.mass * (self.vx * self.vx + self.vy * self.vy)
            + 0.5 * p.yaw_inertia * self.yaw_rate * self.yaw_rate
            + 0.5 * p.wheel_inertia * self.wheel_speeds.iter().map(|w| w * w).sum::<f64>()
    }

    pub(super) fn add_scaled(&self, d: &Derivative, h: f64) -> Self {
        let mut out = *self;
        out.vx += h * d.vx;
        out.vy += h * d.vy;
        out.yaw_rate += h * d.yaw_rate;
        out.heading += h * d.heading;
        out.x += h * d.x;
        out.y += h * d.y;
        for i in 0..WHEELS {
            out.wheel_speeds[i] += h * d.wheel[i];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(super) struct Derivative {
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
    pub heading: f64,
    pub x: f64,
    pub y: f64,
    pub wheel: [f64; WHEELS],
}

impl Derivative {
    pub(super) fn combine(k: [&Derivative; 4]) -> Self {
        let w = |f: fn(&Derivative) -> f64| (f(k[0]) + 2.0 * f(k[1]) + 2.0 * f(k[2]) + f(k[3])) / 6.0;
        let mut wheel = [0.0; WHEELS];
        for (i, v) in wheel.iter_mut().enumerate() {
            *v = (k[0].wheel[i] + 2.0 * k[1].wheel[i] + 2.0 * k[2].wheel[i] + k[3].wheel[i]) / 6.0;
        }
        Self {
            vx: w(|d| d.vx),
            vy: w(|d| d.vy),
            yaw_rate: w(|d| d.yaw_rate),
            heading: w(|d| d.heading),
            x: w(|d| d.x),
            y: w(|d| d.y),
            wheel,
        }
    }
}

/// Full (no small-angle) Newton–Euler right-hand side.
fn derivative(
    s: &VehicleState,
    torques: &[f64; WHEELS],
    steer_front: f64,
    p: &VehicleParams,
    tire: &TireConfig,
    fz: &[f64; WHEELS],
) -> Result<(Derivative, TireForces, (f64, f64)), PlantError> {
    let f = tire_forces_mf(s, steer_front, p, tire, fz)?;
    let (sd, cd) = steer_front.sin_cos();
    let mut fx_sum = 0.0;
    let mut fy_sum = 0.0;
    let mut mz = 0.0;
    let mut wheel = [0.0; WHEELS];
    for (i, (px, py)) in p.wheel_positions().into_iter().enumerate() {
        let (s_i, c_i) = if i < 2 { (sd, cd) } else { (0.0, 1.0) };
        let bx = f.fx[i] * c_i - f.fy[i] * s_i;
        let by = f.fx[i] * s_i + f.fy[i] * c_i;
        fx_sum += bx;
        fy_sum += by;
        mz += px * by - py * bx;
        wheel[i] = (torques[i] - p.wheel_radius * f.fx[i]) / p.wheel_inertia;
    }
    let ax = fx_sum / p.mass;
    let ay = fy_sum / p.mass;
    let (sh, ch) = s.heading.sin_cos();
    let d = Derivative {
        vx: ax + s.vy * s.yaw_rate,
        vy: ay - s.vx * s.yaw_rate,
        yaw_rate: mz / p.yaw_inertia,
        heading: s.yaw_rate,
        x: s.vx * ch - s.vy * sh,
        y: s.vx * sh + s.vy * ch,
        wheel,
    };
    Ok((d, f, (ax, ay)))
}

/// One RK4 step of the plant with vertical loads held over the step.
///
/// Returns the new state, the tire forces at the start of the step and the
/// CG accelerations there (used for the next step's load transfer).
pub fn integrate(
    s: &VehicleState,
    torques: &[f64; WHEELS],
    steer_front: f64,
    p: &VehicleParams,
    tire: &TireConfig,
    fz: &[f64; WHEELS],
    dt: f64,
) -> Result<(VehicleState, TireForces, (f64, f64)), PlantError> {
    if !(dt > 0.0 && dt <= MAX_PLANT_DT * (1.0 + 1e-12)) {
        return Err(PlantError::InvalidParameter(format!("plant step {dt} s outside (0, 1 ms]")));
    }
    let (k1, forces, accel) = derivative(s, torques, steer_front, p, tire, fz)?;
    let (k2, _, _) = derivative(&s.add_scaled(&k1, 0.5 * dt), torques, steer_front, p, tire, fz)?;
    let (k3, _, _) = derivative(&s.add_scaled(&k2, 0.5 * dt), torques, steer_front, p, tire, fz)?;
    let (k4, _, _) = derivative(&s.add_scaled(&k3, dt), torques, steer_front, p, tire, fz)?;
    let next = s.add_scaled(&Derivative::combine([&k1, &k2, &k3, &k4]), dt);
    if !next.is_finite() {
        return Err(PlantError::NonFinite);
    }
    Ok((next, forces, accel))
}

/// Stateful plant wrapper that carries the load-transfer accelerations
/// between steps.
#[derive(Debug, Clone)]
pub struct Plant {
    pub params: VehicleParams,
    pub tire: TireConfig,
    pub state: VehicleState,
    accel: (f64, f64),
    last_forces: TireForces,
}

impl Plant {
    pub fn new(params: VehicleParams, tire: TireConfig, state: VehicleState) -> Result<Self, PlantError> {
        params.validate()?;
        Ok(Self {
            params,
            tire,
            state,
            accel: (0.0, 0.0),
            last_forces: TireForces::default(),
        })
    }

    pub fn loads(&self) -> [f64; WHEELS] {
        vertical_loads(&self.params, self.accel.0, self.accel.1)
    }

    /// CG accelerations (a_x, a_y) from the most recent step, m/s².
    pub fn acceleration(&self) -> (f64, f64) {
        self.accel
    }

    pub fn last_forces(&self) -> &TireForces {
        &self.last_forces
    }

    pub fn step(&mut self, torques: &[f64; WHEELS], steer_front: f64, dt: f64) -> Result<&VehicleState, PlantError> {
        let fz = self.loads();
        let (next, forces, accel) = integrate(&self.state, torques, steer_front, &self.params, &self.tire, &fz, dt)?;
        self.state = next;
        self.last_forces = forces;
        self.accel = accel;
        Ok(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plant(vx: f64, mu: f64) -> Plant {
        let p = VehicleParams { mu, ..Default::default() };
        Plant::new(p, TireConfig::default(), VehicleState::rolling(vx, &p)).unwrap()
    }

    #[test]
    fn straight_rolling_is_an_equilibrium() {
        let mut pl = plant(20.0, 0.7);
        let s0 = pl.state;
        for _ in 0..2000 {
            pl.step(&[0.0; 4], 0.0, 1e-3).unwrap();
        }
        let s = pl.state;
        assert_relative_eq!(s.vx, s0.vx, epsilon = 1e-12);
        assert_eq!(s.vy, 0.0);
        assert_eq!(s.yaw_rate, 0.0);
        assert_relative_eq!(s.x, 40.0, epsilon = 1e-9);
        for w in s.wheel_speeds {
            assert_relative_eq!(w, s.vx / pl.params.wheel_radius, epsilon = 1e-9);
        }
    }

    #[test]
    fn symmetric_torque_goes_straight() {
        let mut pl = plant(15.0, 0.7);
        for _ in 0..3000 {
            pl.step(&[150.0; 4], 0.0, 1e-3).unwrap();
            assert_eq!(pl.state.yaw_rate, 0.0);
            assert_eq!(pl.state.y, 0.0);
        }
        assert!(pl.state.vx > 15.0);
    }

    #[test]
    fn rejects_large_step() {
        let mut pl = plant(15.0, 0.7);
        assert!(pl.step(&[0.0; 4], 0.0, 2e-3).is_err());
    }

    #[test]
    fn low_speed_circle_matches_kinematic_yaw_rate() {
        let vx = 20.0 / 3.6;
        let delta = 2f64.to_radians();
        let mut pl = plant(vx, 0.7);
        for _ in 0..8000 {
            // Hold speed with a little drive torque to offset cornering drag.
            let t = 200.0 * (vx - pl.state.vx);
            pl.step(&[t; 4], delta, 1e-3).unwrap();
        }
        let kinematic = pl.state.vx * delta / pl.params.wheelbase();
        assert_relative_eq!(pl.state.yaw_rate, kinematic, max_relative = 0.05);
    }

    #[test]
    fn coasting_never_gains_energy() {
        let mut pl = plant(22.0, 0.35);
        pl.state.vy = 1.0;
        pl.state.yaw_rate = 0.3;
        pl.state.wheel_speeds = [55.0, 65.0, 60.0, 62.0];
        let mut e = pl.state.kinetic_energy(&pl.params);
        for _ in 0..3000 {
            pl.step(&[0.0; 4], 0.0, 1e-3).unwrap();
            let e2 = pl.state.kinetic_energy(&pl.params);
            assert!(e2 <= e + 1e-9 * e, "energy rose from {e} to {e2}");
            e = e2;
        }
    }

    #[test]
    fn friction_circle_holds_every_step() {
        let mut pl = plant(25.0, 0.35);
        for k in 0..4000 {
            let steer = 0.08 * (k as f64 * 3e-3).sin();
            pl.step(&[300.0, -200.0, 300.0, -200.0], steer, 1e-3).unwrap();
            if pl.state.vx < 2.0 {
                // spun out
                break;
            }
            let f = pl.last_forces();
            for i in 0..4 {
                assert!(f.fx[i].hypot(f.fy[i]) <= pl.params.mu * f.fz[i] + 1e-9);
            }
        }
    }
}
