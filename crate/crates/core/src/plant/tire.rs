//! Tire slip kinematics and force laws.
//!
//! Sign convention: slip angle α is the angle of the contact-patch velocity
//! relative to the wheel heading, so a positive α produces a negative lateral
//! force (F_y = C·α with C < 0). Slip ratio κ is positive when driving.

use serde::{Deserialize, Serialize};

use super::{PlantError, VehicleParams, VehicleState, WHEELS};
use crate::GRAVITY;

/// Below this longitudinal speed slip quantities are not defined.
pub const MIN_SLIP_SPEED: f64 = 0.1;

/// Pacejka shape coefficients; the peak D is supplied per call as μ·F_z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfCoefficients {
    pub b: f64,
    pub c: f64,
    pub e: f64,
}

impl MfCoefficients {
    /// Slip at which the pure-slip curve peaks.
    ///
    /// The peak sits where `B·s − E(B·s − atan(B·s)) = tan(π/(2C))`; the left
    /// side is increasing for E < 1 so bisection is enough.
    pub fn peak_slip(&self) -> f64 {
        let target = (std::f64::consts::PI / (2.0 * self.c)).tan();
        let g = |x: f64| x - self.e * (x - x.atan());
        let (mut lo, mut hi) = (0.0, 1.0);
        while g(hi) < target {
            hi *= 2.0;
            if hi > 1e6 {
                return hi / self.b;
            }
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi) / self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TireModelKind {
    #[default]
    MagicFormula,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TireConfig {
    pub lateral: MfCoefficients,
    pub longitudinal: MfCoefficients,
    /// Fractional loss of peak friction per unit relative load increase.
    /// Zero keeps D = μ·F_z exactly.
    pub load_sensitivity: f64,
}

impl Default for TireConfig {
    fn default() -> Self {
        Self {
            lateral: MfCoefficients { b: 10.0, c: 1.9, e: 0.97 },
            longitudinal: MfCoefficients { b: 12.0, c: 1.65, e: 0.6 },
            load_sensitivity: 0.0,
        }
    }
}

/// Pure-slip Magic Formula `D·sin(C·atan(B·s − E·(B·s − atan(B·s))))`.
#[inline]
pub fn magic_formula(slip: f64, k: &MfCoefficients, d: f64) -> f64 {
    let bs = k.b * slip;
    d * (k.c * (bs - k.e * (bs - bs.atan())).atan()).sin()
}

/// How wheel slip angles are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlipKinematics {
    /// Full rotation into the wheel frame and `atan`.
    Exact,
    /// Linearised: α_i = (V_y + x_i·ω)/(V_x − y_i·ω) − δ_i.
    SmallAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TireForces {
    /// Tire-frame longitudinal force, N.
    pub fx: [f64; WHEELS],
    /// Tire-frame lateral force, N.
    pub fy: [f64; WHEELS],
    pub kappa: [f64; WHEELS],
    /// rad
    pub alpha: [f64; WHEELS],
    /// N
    pub fz: [f64; WHEELS],
}

impl TireForces {
    /// Largest ratio ‖(F_x, F_y)‖ / (μ·F_z) over the four tires.
    pub fn max_utilisation(&self, mu: f64) -> f64 {
        (0..WHEELS)
            .map(|i| {
                let cap = mu * self.fz[i];
                if cap > 0.0 {
                    self.fx[i].hypot(self.fy[i]) / cap
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Static axle split with no acceleration.
pub fn static_loads(p: &VehicleParams) -> [f64; WHEELS] {
    vertical_loads(p, 0.0, 0.0)
}

/// Quasi-static loads with longitudinal and lateral transfer from the CG
/// accelerations `ax`, `ay` (m/s², body frame). Wheels never go negative.
pub fn vertical_loads(p: &VehicleParams, ax: f64, ay: f64) -> [f64; WHEELS] {
    let l = p.wheelbase();
    let w = p.mass * GRAVITY;
    let front = w * p.lr / l - p.mass * ax * p.cg_height / l;
    let rear = w * p.lf / l + p.mass * ax * p.cg_height / l;
    let dy_front = p.mass * ay * p.cg_height * p.lr / (l * p.track_width);
    let dy_rear = p.mass * ay * p.cg_height * p.lf / (l * p.track_width);
    [
        (0.5 * front - dy_front).max(0.0),
        (0.5 * front + dy_front).max(0.0),
        (0.5 * rear - dy_rear).max(0.0),
        (0.5 * rear + dy_rear).max(0.0),
    ]
}

/// Slip angle and slip ratio at each wheel.
pub fn wheel_slips(
    s: &VehicleState,
    steer_front: f64,
    p: &VehicleParams,
    kin: SlipKinematics,
) -> Result<([f64; WHEELS], [f64; WHEELS]), PlantError> {
    if !(s.vx >= MIN_SLIP_SPEED) {
        return Err(PlantError::DegenerateSpeed(s.vx));
    }
    let mut alpha = [0.0; WHEELS];
    let mut kappa = [0.0; WHEELS];
    for (i, (x, y)) in p.wheel_positions().into_iter().enumerate() {
        let delta = if i < 2 { steer_front } else { 0.0 };
        let vx_b = s.vx - y * s.yaw_rate;
        let vy_b = s.vy + x * s.yaw_rate;
        let v_long = match kin {
            SlipKinematics::Exact => {
                let (sd, cd) = delta.sin_cos();
                let v_long = vx_b * cd + vy_b * sd;
                let v_lat = -vx_b * sd + vy_b * cd;
                alpha[i] = v_lat.atan2(v_long.abs().max(MIN_SLIP_SPEED));
                v_long
            }
            SlipKinematics::SmallAngle => {
                alpha[i] = vy_b / vx_b.max(MIN_SLIP_SPEED) - delta;
                vx_b
            }
        };
        let denom = v_long.abs().max(MIN_SLIP_SPEED);
        kappa[i] = (s.wheel_speeds[i] * p.wheel_radius - v_long) / denom;
    }
    Ok((alpha, kappa))
}

fn peak_force(mu: f64, fz: f64, fz_nominal: f64, sensitivity: f64) -> f64 {
    if sensitivity == 0.0 {
        mu * fz
    } else {
        mu * fz * (1.0 - sensitivity * (fz - fz_nominal) / fz_nominal).max(0.0)
    }
}

fn cap_to_circle(fx: &mut f64, fy: &mut f64, cap: f64) {
    let m = fx.hypot(*fy);
    if m > cap {
        let s = if m > 0.0 { cap / m } else { 0.0 };
        *fx *= s;
        *fy *= s;
    }
}

/// Magic Formula forces from given slips and loads.
///
/// With `combined` the pure-slip curves are evaluated at the resultant of
/// the normalised demand (κ/κ_peak, tan α/tan α_peak) and projected back
/// along its direction, which keeps ‖F‖ ≤ μ·F_z.
pub fn mf_forces(
    alpha: &[f64; WHEELS],
    kappa: &[f64; WHEELS],
    fz: &[f64; WHEELS],
    mu: f64,
    cfg: &TireConfig,
    combined: bool,
) -> TireForces {
    let fz_nominal = fz.iter().sum::<f64>() / WHEELS as f64;
    let (kp, ap) = if combined {
        (cfg.longitudinal.peak_slip(), cfg.lateral.peak_slip().tan())
    } else {
        (1.0, 1.0)
    };
    let mut out = TireForces { kappa: *kappa, alpha: *alpha, fz: *fz, ..Default::default() };
    for i in 0..WHEELS {
        let d = peak_force(mu, fz[i], fz_nominal, cfg.load_sensitivity);
        let (mut fx, mut fy);
        if combined {
            let sx = kappa[i] / kp;
            let sy = alpha[i].tan() / ap;
            let s = sx.hypot(sy);
            if s > 1e-12 {
                fx = magic_formula(s * kp, &cfg.longitudinal, d) * sx / s;
                fy = -magic_formula((s * ap).atan(), &cfg.lateral, d) * sy / s;
            } else {
                fx = magic_formula(kappa[i], &cfg.longitudinal, d);
                fy = -magic_formula(alpha[i], &cfg.lateral, d);
            }
        } else {
            fx = magic_formula(kappa[i], &cfg.longitudinal, d);
            fy = -magic_formula(alpha[i], &cfg.lateral, d);
        }
        cap_to_circle(&mut fx, &mut fy, mu * fz[i]);
        out.fx[i] = fx;
        out.fy[i] = fy;
    }
    out
}

/// Linear forces: half the axle stiffness per wheel laterally, the MF origin
/// slope longitudinally, capped by the friction circle.
pub fn linear_forces(
    alpha: &[f64; WHEELS],
    kappa: &[f64; WHEELS],
    fz: &[f64; WHEELS],
    p: &VehicleParams,
    cfg: &TireConfig,
) -> TireForces {
    let mut out = TireForces { kappa: *kappa, alpha: *alpha, fz: *fz, ..Default::default() };
    let lon = &cfg.longitudinal;
    for i in 0..WHEELS {
        let cap = p.mu * fz[i];
        let c_axle = if i < 2 { p.cf } else { p.cr };
        let mut fy = (0.5 * c_axle * alpha[i]).clamp(-cap, cap);
        let mut fx = (lon.b * lon.c * cap * kappa[i]).clamp(-cap, cap);
        cap_to_circle(&mut fx, &mut fy, cap);
        out.fx[i] = fx;
        out.fy[i] = fy;
    }
    out
}

/// Combined-slip Magic Formula forces for the plant state.
pub fn tire_forces_mf(
    s: &VehicleState,
    steer_front: f64,
    p: &VehicleParams,
    cfg: &TireConfig,
    fz: &[f64; WHEELS],
) -> Result<TireForces, PlantError> {
    let (alpha, kappa) = wheel_slips(s, steer_front, p, SlipKinematics::Exact)?;
    Ok(mf_forces(&alpha, &kappa, fz, p.mu, cfg, true))
}

/// Linear-tire forces for the plant state.
pub fn tire_forces_linear(
    s: &VehicleState,
    steer_front: f64,
    p: &VehicleParams,
    cfg: &TireConfig,
    fz: &[f64; WHEELS],
) -> Result<TireForces, PlantError> {
    let (alpha, kappa) = wheel_slips(s, steer_front, p, SlipKinematics::Exact)?;
    Ok(linear_forces(&alpha, &kappa, fz, p, cfg))
}
