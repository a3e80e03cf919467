//! Linear 2-DoF bicycle MPC and the linear steady-state references shared
//! with the MF baseline.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector2, Vector3};

use super::{nmpc_cost, ControlError, NmpcConfig, YawMomentCommand, HORIZON};
use crate::plant::VehicleParams;
use crate::reference::ReferenceTargets;
use crate::PlanarState;

/// Speed below which the linear model is not used, m/s.
pub const LINEAR_SPEED_FLOOR: f64 = 1.0;

/// Continuous bicycle model ẋ = A·x + b_δ·δ_f + b_M·ΔM with x = (V_y, ω_r).
pub fn bicycle_matrices(p: &VehicleParams, vx: f64) -> (Matrix2<f64>, Vector2<f64>, Vector2<f64>) {
    let (m, iz, lf, lr, cf, cr) = (p.mass, p.yaw_inertia, p.lf, p.lr, p.cf, p.cr);
    let a = Matrix2::new(
        (cf + cr) / (m * vx),
        (lf * cf - lr * cr) / (m * vx) - vx,
        (lf * cf - lr * cr) / (iz * vx),
        (lf * lf * cf + lr * lr * cr) / (iz * vx),
    );
    let b_steer = Vector2::new(-cf / m, -lf * cf / iz);
    let b_moment = Vector2::new(0.0, p.track_width / (2.0 * iz * p.wheel_radius));
    (a, b_steer, b_moment)
}

/// Steady-state yaw rate and lateral velocity of the linear bicycle.
pub fn linear_references(p: &VehicleParams, vx: f64, steer_front: f64) -> ReferenceTargets {
    let l = p.wheelbase();
    let yaw_rate = vx * steer_front / (l + p.understeer_gradient() * vx * vx);
    let vy = yaw_rate * (p.lr - p.mass * vx * vx * p.lf / (l * p.cr.abs()));
    let sideslip = if vx.abs() > 0.0 { vy / vx } else { 0.0 };
    ReferenceTargets { vy, yaw_rate, sideslip }
}

/// Zero-order-hold discretisation of [`bicycle_matrices`].
pub fn discretise(p: &VehicleParams, vx: f64, dt: f64) -> (Matrix2<f64>, Vector2<f64>, Vector2<f64>) {
    let (a, bs, bm) = bicycle_matrices(p, vx);
    let mut aug = Matrix4::zeros();
    aug.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    aug.fixed_view_mut::<2, 1>(0, 2).copy_from(&bs);
    aug.fixed_view_mut::<2, 1>(0, 3).copy_from(&bm);
    let e = (aug * dt).exp();
    (
        e.fixed_view::<2, 2>(0, 0).into_owned(),
        e.fixed_view::<2, 1>(0, 2).into_owned(),
        e.fixed_view::<2, 1>(0, 3).into_owned(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lmpc {
    pub cfg: NmpcConfig,
    pub params: VehicleParams,
    pub dt: f64,
}

impl Lmpc {
    pub fn new(cfg: NmpcConfig, params: VehicleParams, dt: f64) -> Result<Self, ControlError> {
        cfg.validate()?;
        if !(dt > 0.0) {
            return Err(ControlError::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { cfg, params, dt })
    }

    /// Predicted (V_y, ω_r) for a yaw-moment sequence.
    pub fn predict(&self, x: &PlanarState, steer_front: f64, seq: &[f64; HORIZON]) -> [PlanarState; HORIZON] {
        let (ad, bs, bm) = discretise(&self.params, x.vx, self.dt);
        let mut s = Vector2::new(x.vy, x.yaw_rate);
        std::array::from_fn(|i| {
            s = ad * s + bs * steer_front + bm * seq[i];
            PlanarState::new(x.vx, s[0], s[1])
        })
    }

    /// Exact solution of the box-constrained quadratic problem.
    pub fn solve(&self, x: &PlanarState, steer_front: f64) -> Result<YawMomentCommand, ControlError> {
        if !(x.vx > LINEAR_SPEED_FLOOR) {
            return Err(ControlError::LowSpeed(x.vx));
        }
        let refs = linear_references(&self.params, x.vx, steer_front);
        // Outputs are affine in the sequence: y = y0 + G·u.
        let free = self.predict(x, steer_front, &[0.0; HORIZON]);
        let (ad, _, bm) = discretise(&self.params, x.vx, self.dt);
        let mut impulse = [Vector2::zeros(); HORIZON];
        impulse[0] = bm;
        for k in 1..HORIZON {
            impulse[k] = ad * impulse[k - 1];
        }
        let mut h = DMatrix::<f64>::zeros(HORIZON, HORIZON);
        let mut g = DVector::<f64>::zeros(HORIZON);
        for i in 0..HORIZON {
            let c_yaw = Vector3::from_fn(|j, _| if j <= i { impulse[i - j][1] } else { 0.0 });
            let c_beta = Vector3::from_fn(|j, _| if j <= i { impulse[i - j][0] / x.vx } else { 0.0 });
            let e_yaw = refs.yaw_rate - free[i].yaw_rate;
            let e_beta = refs.sideslip - free[i].vy / x.vx;
            for a in 0..HORIZON {
                g[a] -= 2.0 * (self.cfg.q[i] * e_yaw * c_yaw[a] + self.cfg.r[i] * e_beta * c_beta[a]);
                for b in 0..HORIZON {
                    h[(a, b)] += 2.0 * (self.cfg.q[i] * c_yaw[a] * c_yaw[b] + self.cfg.r[i] * c_beta[a] * c_beta[b]);
                }
            }
        }
        let (u, checked) = box_qp(&h, &g, self.cfg.dm_min, self.cfg.dm_max);
        let seq = [u[0], u[1], u[2]];
        let pred = self.predict(x, steer_front, &seq);
        Ok(YawMomentCommand {
            dm: seq[0],
            sequence: seq,
            cost: nmpc_cost(&pred, &refs, &self.cfg),
            iterations: checked,
            failed: false,
            predicted: pred[0],
        })
    }
}

/// Minimises ½uᵀHu + gᵀu over lo ≤ u ≤ hi by enumerating active sets.
/// Returns the minimiser and the number of faces examined.
pub fn box_qp(h: &DMatrix<f64>, g: &DVector<f64>, lo: f64, hi: f64) -> (DVector<f64>, usize) {
    let n = g.len();
    let quad = |u: &DVector<f64>| 0.5 * u.dot(&(h * u)) + g.dot(u);
    let mut best: Option<(DVector<f64>, f64)> = None;
    let faces = 3usize.pow(n as u32);
    for code in 0..faces {
        // 0 free, 1 at lower bound, 2 at upper bound
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        let mut u = DVector::from_fn(n, |i, _| match state[i] {
            1 => lo,
            2 => hi,
            _ => 0.0,
        });
        if !free.is_empty() {
            let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
            let hu = h * &u;
            let rhs = DVector::from_fn(free.len(), |a, _| -(g[free[a]] + hu[free[a]]));
            let Some(sol) = hff.cholesky().map(|c| c.solve(&rhs)) else {
                continue;
            };
            for (a, &i) in free.iter().enumerate() {
                u[i] = sol[a];
            }
            if free.iter().any(|&i| u[i] < lo || u[i] > hi) {
                continue;
            }
        }
        let c = quad(&u);
        if best.as_ref().is_none_or(|b| c < b.1) {
            best = Some((u, c));
        }
    }
    (best.expect("the all-bound face is always feasible").0, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn understeer_gradient_regression() {
        assert_relative_eq!(VehicleParams::default().understeer_gradient(), -6.120406791913843e-4, max_relative = 1e-12);
    }

    #[test]
    fn straight_running_is_neutral() {
        let l = Lmpc::new(NmpcConfig::default(), VehicleParams::default(), 0.05).unwrap();
        let out = l.solve(&PlanarState::new(18.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(out.dm, 0.0);
        let r = linear_references(&VehicleParams::default(), 18.0, 0.0);
        assert_eq!((r.vy, r.yaw_rate, r.sideslip), (0.0, 0.0, 0.0));
    }

    /// Settled yaw rate of an independently stepped continuous model.
    #[test]
    fn steady_state_gain_matches_time_domain() {
        let p = VehicleParams::default();
        let v = 65.0 / 3.6;
        let delta = 0.01;
        let (m, iz, lf, lr, cf, cr) = (p.mass, p.yaw_inertia, p.lf, p.lr, p.cf, p.cr);
        let f = |vy: f64, r: f64| {
            let fyf = cf * ((vy + lf * r) / v - delta);
            let fyr = cr * ((vy - lr * r) / v);
            ((fyf + fyr) / m - v * r, (lf * fyf - lr * fyr) / iz)
        };
        let (mut vy, mut r) = (0.0, 0.0);
        let h = 1e-3;
        for _ in 0..20_000 {
            let k1 = f(vy, r);
            let k2 = f(vy + 0.5 * h * k1.0, r + 0.5 * h * k1.1);
            let k3 = f(vy + 0.5 * h * k2.0, r + 0.5 * h * k2.1);
            let k4 = f(vy + h * k3.0, r + h * k3.1);
            vy += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            r += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let refs = linear_references(&p, v, delta);
        assert_relative_eq!(refs.yaw_rate, r, max_relative = 0.01);
        assert_relative_eq!(refs.vy, vy, max_relative = 0.01);
    }

    #[test]
    fn discretisation_matches_fine_euler() {
        let p = VehicleParams::default();
        let (a, bs, bm) = bicycle_matrices(&p, 20.0);
        let (ad, bsd, bmd) = discretise(&p, 20.0, 0.05);
        let mut x = Vector2::new(0.1, 0.05);
        let x0 = x;
        let n = 50_000;
        let h = 0.05 / n as f64;
        for _ in 0..n {
            x += (a * x + bs * 0.02 + bm * 500.0) * h;
        }
        let xd = ad * x0 + bsd * 0.02 + bmd * 500.0;
        assert_abs_diff_eq!(x[0], xd[0], epsilon = 1e-5);
        assert_abs_diff_eq!(x[1], xd[1], epsilon = 1e-5);
    }

    #[test]
    fn box_qp_against_grid() {
        let h = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let g = DVector::from_row_slice(&[-9.0, 2.0, 0.3]);
        let (u, _) = box_qp(&h, &g, -1.0, 1.0);
        let quad = |u: &DVector<f64>| 0.5 * u.dot(&(&h * u)) + g.dot(u);
        let best = quad(&u);
        let n = 41;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = DVector::from_row_slice(&[i, j, k].map(|t| -1.0 + 2.0 * t as f64 / (n - 1) as f64));
                    assert!(best <= quad(&v) + 1e-12);
                }
            }
        }
        assert!(u.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn cornering_demand_produces_bounded_moment() {
        let l = Lmpc::new(NmpcConfig::default(), VehicleParams::default(), 0.05).unwrap();
        let out = l.solve(&PlanarState::new(18.0, 0.0, 0.0), 0.05).unwrap();
        assert!(out.dm > 0.0 && out.dm <= 1600.0);
        let mirror = l.solve(&PlanarState::new(18.0, 0.0, 0.0), -0.05).unwrap();
        assert_abs_diff_eq!(out.dm, -mirror.dm, epsilon = 1e-9);
        assert!(matches!(l.solve(&PlanarState::new(0.5, 0.0, 0.0), 0.05), Err(ControlError::LowSpeed(_))));
    }
}
